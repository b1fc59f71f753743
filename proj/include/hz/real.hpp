#pragma once

// Arbitrary-precision real scalar used throughout. Backed by MPFR through
// Boost.Multiprecision with runtime-variable precision and expression
// templates disabled (value semantics, no surprise laziness).

#include <boost/multiprecision/mpfr.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hz {

namespace mp = boost::multiprecision;

using Real = mp::number<mp::mpfr_float_backend<0>, mp::et_off>;

// MPFR default precision is process-global, not thread-local. Concurrent
// tasks must therefore run at a single common precision; the work queue in
// the cli module enforces this by fixing the precision before dispatch.
inline unsigned digits10_for_bits(unsigned bits) {
    return static_cast<unsigned>(std::ceil(bits * 0.30102999566398119)) + 2;
}

inline unsigned current_precision_bits() {
    return static_cast<unsigned>(std::ceil(Real::default_precision() * 3.3219280948873623));
}

// Scoped precision change; restores the previous default on destruction.
class PrecisionGuard {
  public:
    explicit PrecisionGuard(unsigned precision_bits)
        : saved_digits10_(Real::default_precision()) {
        if (precision_bits < 53)
            throw std::invalid_argument("precision_bits must be >= 53");
        Real::default_precision(digits10_for_bits(precision_bits));
    }
    PrecisionGuard(const PrecisionGuard&) = delete;
    PrecisionGuard& operator=(const PrecisionGuard&) = delete;
    ~PrecisionGuard() { Real::default_precision(saved_digits10_); }

  private:
    unsigned saved_digits10_;
};

inline Real pi() {
    Real out;
    mpfr_const_pi(out.backend().data(), MPFR_RNDN);
    return out;
}

// Round a value to the current working precision. Boost's variable-precision
// arithmetic lets an rvalue operand's (possibly much lower or higher)
// precision leak into results, so compute kernels normalize their long-lived
// inputs on entry: inputs parsed at high precision stay accurate, and the
// hot loops run at exactly the working precision.
inline Real to_working(const Real& x) { return Real(x, Real::default_precision()); }

inline Real machine_epsilon() {
    // 2^(1 - working precision in bits)
    Real one = 1;
    return ldexp(one, 1 - static_cast<long>(mpfr_get_prec(one.backend().data())));
}

inline Real parse_real(const std::string& text) {
    try {
        return Real(text);
    } catch (const std::exception&) {
        throw std::invalid_argument("cannot parse real number from '" + text + "'");
    }
}

// Full-precision decimal string that round-trips at the value's precision.
inline std::string to_decimal_string(const Real& x) {
    return x.str(0, std::ios_base::scientific);
}

// short form for log messages; files keep full precision
inline std::string display_string(const Real& x) { return x.str(8); }

// precision at which configuration files and cached payloads are parsed;
// comfortably above the deepest working precision (512-bit ladder + guards)
inline constexpr unsigned kParsePrecisionBits = 672;

inline Real abs_real(const Real& x) { return abs(x); }

inline bool is_finite(const Real& x) { return mpfr_number_p(x.backend().data()) != 0; }

inline Real pow_int(const Real& base, long n) {
    if (n == 0) return Real(1);
    Real b = base;
    bool neg = n < 0;
    unsigned long k = neg ? static_cast<unsigned long>(-n) : static_cast<unsigned long>(n);
    Real acc = 1;
    while (k) {
        if (k & 1) acc *= b;
        b *= b;
        k >>= 1;
    }
    return neg ? Real(1) / acc : acc;
}

}  // namespace hz
