#pragma once

#include "scrip/model.hpp"

namespace fixture {

inline scrip::AgentType agent(double alpha, double beta = 1.0, double gamma = 1.0, double delta = 0.95,
                              double rho = 1.0, double chi = 1.0) {
  scrip::AgentType t;
  t.alpha = alpha;
  t.beta = beta;
  t.gamma = gamma;
  t.delta = delta;
  t.rho = rho;
  t.chi = chi;
  return t;
}

// Two types (.05 and .15 cost), f = (.3,.7), h = 10, n = 100.
inline scrip::ValidatedSpec two_type(scrip::Rational m = scrip::Rational(4)) {
  scrip::GameSpec g;
  g.types = {{agent(0.05), scrip::Rational(3, 10)}, {agent(0.15), scrip::Rational(7, 10)}};
  g.h = 10;
  g.n = 100;
  g.m = m;
  return scrip::validate_spec(g);
}

inline scrip::ValidatedSpec single(const scrip::AgentType& t, scrip::Rational m, std::int64_t h = 10,
                                   std::int64_t n = 100) {
  scrip::GameSpec g;
  g.types = {{t, scrip::Rational(1)}};
  g.h = h;
  g.n = n;
  g.m = m;
  return scrip::validate_spec(g);
}

// Low-ability game: alpha .08, beta .01, delta .97, n = 10000.
inline scrip::ValidatedSpec low_ability(scrip::Rational m, std::int64_t h = 20) {
  return single(agent(0.08, 0.01, 1.0, 0.97), m, h, 10000);
}

}  // namespace fixture
