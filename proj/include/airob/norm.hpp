#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "airob/errors.hpp"

namespace airob {

/// Order of the lp attack budget. p = 1 and p = infinity take dedicated
/// code paths everywhere; the finite branch requires p > 1 so that the
/// exponent p/(p-1) stays well defined.
class NormOrder {
  public:
    enum class Tag { one, finite, infinity_ };

    static NormOrder one() { return NormOrder(Tag::one, 1.0); }
    static NormOrder finite(double p) {
        if (!(p > 1.0) || !std::isfinite(p))
            fail(errc::invalid_parameter, "norm order: finite p must satisfy 1 < p < inf");
        return NormOrder(Tag::finite, p);
    }
    static NormOrder infinity() {
        return NormOrder(Tag::infinity_, std::numeric_limits<double>::infinity());
    }

    /// Accepts "1", "inf", "infinity", or any decimal p > 1.
    static NormOrder parse(const std::string& text);

    Tag tag() const { return tag_; }
    bool is_one() const { return tag_ == Tag::one; }
    bool is_finite() const { return tag_ == Tag::finite; }
    bool is_infinity() const { return tag_ == Tag::infinity_; }

    /// Numeric value (1, p, or +inf).
    double value() const { return p_; }

    /// Conjugate exponent q = p/(p-1); only meaningful for the finite branch.
    double conjugate() const { return p_ / (p_ - 1.0); }

    std::string str() const;

  private:
    NormOrder(Tag tag, double p) : tag_(tag), p_(p) {}
    Tag tag_;
    double p_;
};

inline NormOrder NormOrder::parse(const std::string& text) {
    if (text == "inf" || text == "infinity" || text == "Inf") return infinity();
    double p = 0.0;
    try {
        std::size_t pos = 0;
        p = std::stod(text, &pos);
        if (pos != text.size()) fail(errc::parse_error, "norm order: trailing characters in '" + text + "'");
    } catch (const std::logic_error&) {
        fail(errc::parse_error, "norm order: cannot parse '" + text + "'");
    }
    if (p == 1.0) return one();
    return finite(p);
}

inline std::string NormOrder::str() const {
    switch (tag_) {
        case Tag::one: return "1";
        case Tag::infinity_: return "inf";
        default: {
            std::string s = std::to_string(p_);
            s.erase(s.find_last_not_of('0') + 1);
            if (!s.empty() && s.back() == '.') s.pop_back();
            return s;
        }
    }
}

}  // namespace airob
