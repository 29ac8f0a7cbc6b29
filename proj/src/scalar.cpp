#include "cdh/scalar.hpp"

#include "cdh/errors.hpp"

namespace cdh {

Scalar ratio(long num, long den) {
  if (den == 0) throw ParseError("zero denominator");
  Scalar out(num, den);
  out.canonicalize();
  return out;
}

Scalar pow2(long exponent) {
  mpz_class power = 1;
  const unsigned long magnitude = exponent < 0 ? static_cast<unsigned long>(-exponent)
                                               : static_cast<unsigned long>(exponent);
  mpz_mul_2exp(power.get_mpz_t(), power.get_mpz_t(), magnitude);
  Scalar result = exponent < 0 ? Scalar(mpz_class(1), power) : Scalar(power);
  result.canonicalize();
  return result;
}

std::string to_string(const Scalar& value) {
  return value.get_num().get_str() + "/" + value.get_den().get_str();
}

Scalar parse_scalar(std::string_view text) {
  const std::string s(text);
  Scalar out;
  if (s.empty() || out.set_str(s, 10) != 0 || out.get_den() == 0) {
    throw ParseError("not a rational: '" + s + "'");
  }
  out.canonicalize();
  return out;
}

Scalar floor_of(const Scalar& value) {
  mpz_class q;
  mpz_fdiv_q(q.get_mpz_t(), value.get_num_mpz_t(), value.get_den_mpz_t());
  return Scalar(q);
}

Scalar frac(const Scalar& value) { return value - floor_of(value); }

Scalar abs_of(const Scalar& value) { return value < 0 ? Scalar(-value) : value; }

}  // namespace cdh
