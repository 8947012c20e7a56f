#include "hsns/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <string>

#include "hsns/error.hpp"

namespace hsns::gl {

namespace {

template <unsigned N>
Rule expand() {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& x = G::abscissa();
  const auto& w = G::weights();
  Rule r;
  // boost stores the non-negative half; N is even here so zero is not a node
  for (std::size_t i = x.size(); i-- > 0;) {
    r.x.push_back(-x[i]);
    r.w.push_back(w[i]);
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    r.x.push_back(x[i]);
    r.w.push_back(w[i]);
  }
  return r;
}

}  // namespace

Rule legendre(int n) {
  switch (n) {
    case 4: return expand<4>();
    case 6: return expand<6>();
    case 8: return expand<8>();
    case 10: return expand<10>();
    case 12: return expand<12>();
    case 16: return expand<16>();
    case 20: return expand<20>();
    default: throw DomainError("gauss-legendre: unsupported point count " + std::to_string(n));
  }
}

}  // namespace hsns::gl
