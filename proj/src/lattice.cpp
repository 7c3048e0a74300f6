#include "eertag/lattice.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "eertag/error.hpp"

namespace eertag {

namespace {

// Log-sum-exp over the finite entries of v. Collapses to kLogZero when no
// entry carries mass.
double log_sum_exp(const std::vector<double>& v) {
  double m = kLogZero;
  for (double x : v)
    if (x > m) m = x;
  if (is_impossible(m)) return kLogZero;
  double s = 0.0;
  for (double x : v) {
    if (!is_impossible(x)) s += std::exp(x - m);
  }
  return m + std::log(s);
}

void check_lattice(const PotentialLattice& lat) {
  if (lat.length < 1) fail(ErrorCode::invalid_argument, "lattice length must be >= 1");
  if (lat.num_tags < 1) fail(ErrorCode::invalid_argument, "lattice needs tags");
}

}  // namespace

TransitionMask TransitionMask::biluo(const TagSet& tagset) {
  const int y = tagset.size();
  TransitionMask mask;
  mask.num_tags = y;
  mask.allowed.assign(static_cast<std::size_t>(y) * y, 0);
  mask.start_allowed.assign(y, 0);
  mask.end_allowed.assign(y, 0);
  for (int from = 0; from < y; ++from) {
    TagRole fr = tagset.role(from);
    int fc = tagset.entity_class(from);
    bool from_closes = fr == TagRole::o || fr == TagRole::last || fr == TagRole::unit;
    for (int to = 0; to < y; ++to) {
      TagRole tr = tagset.role(to);
      int tc = tagset.entity_class(to);
      bool ok;
      if (from_closes) {
        // A closed context may start anything that can follow O.
        ok = tr == TagRole::o || tr == TagRole::begin || tr == TagRole::unit;
      } else {
        // Inside a span (after B-c or I-c) only I-c or L-c of the same class.
        ok = (tr == TagRole::inside || tr == TagRole::last) && tc == fc;
      }
      mask.allowed[static_cast<std::size_t>(from) * y + to] = ok ? 1 : 0;
    }
    // Book-ends behave like O on both sides.
    mask.start_allowed[from] = mask.allowed[static_cast<std::size_t>(tagset.o_index()) * y + from];
    mask.end_allowed[from] = mask.allowed[static_cast<std::size_t>(from) * y + tagset.o_index()];
  }
  return mask;
}

TransitionMask TransitionMask::open(int num_tags) {
  TransitionMask mask;
  mask.num_tags = num_tags;
  mask.allowed.assign(static_cast<std::size_t>(num_tags) * num_tags, 1);
  mask.start_allowed.assign(num_tags, 1);
  mask.end_allowed.assign(num_tags, 1);
  return mask;
}

PotentialLattice PotentialLattice::make(Matrix unary, const Matrix& transition,
                                        TransitionMask mask) {
  PotentialLattice lat;
  lat.length = unary.rows;
  lat.num_tags = unary.cols;
  if (transition.rows != lat.num_tags || transition.cols != lat.num_tags ||
      mask.num_tags != lat.num_tags) {
    fail(ErrorCode::shape_mismatch, "lattice shapes disagree");
  }
  for (double v : unary.data) {
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
      fail(ErrorCode::non_finite, "non-finite unary potential");
    }
  }
  lat.unary = std::move(unary);
  lat.transition = Matrix(lat.num_tags, lat.num_tags, kLogZero);
  for (int a = 0; a < lat.num_tags; ++a) {
    for (int b = 0; b < lat.num_tags; ++b) {
      if (!mask.transition(a, b)) continue;
      double v = transition(a, b);
      if (!std::isfinite(v)) fail(ErrorCode::non_finite, "non-finite transition");
      lat.transition(a, b) = v;
    }
  }
  lat.mask = std::move(mask);
  return lat;
}

void LatticeGradients::add_scaled(const LatticeGradients& other, double scale) {
  for (std::size_t i = 0; i < d_unary.data.size(); ++i)
    d_unary.data[i] += scale * other.d_unary.data[i];
  for (std::size_t i = 0; i < d_transition.data.size(); ++i)
    d_transition.data[i] += scale * other.d_transition.data[i];
}

FbTables forward_backward(const PotentialLattice& lat) {
  check_lattice(lat);
  const int n = lat.length;
  const int y = lat.num_tags;
  FbTables fb;
  fb.alpha = Matrix(n, y, kLogZero);
  fb.beta = Matrix(n, y, kLogZero);

  std::vector<double> cand(y);
  for (int t = 0; t < y; ++t)
    fb.alpha(0, t) = lat.mask.start_allowed[t] ? lat.unary(0, t) : kLogZero;
  for (int i = 1; i < n; ++i) {
    for (int t = 0; t < y; ++t) {
      for (int p = 0; p < y; ++p) cand[p] = fb.alpha(i - 1, p) + lat.transition(p, t);
      double lse = log_sum_exp(cand);
      fb.alpha(i, t) = is_impossible(lse) ? kLogZero : lse + lat.unary(i, t);
    }
  }

  for (int t = 0; t < y; ++t) cand[t] = lat.mask.end_allowed[t] ? fb.alpha(n - 1, t) : kLogZero;
  fb.log_z = log_sum_exp(cand);
  if (is_impossible(fb.log_z)) {
    fail(ErrorCode::no_valid_path, "no mask-valid tagging has mass");
  }

  for (int t = 0; t < y; ++t)
    fb.beta(n - 1, t) = lat.mask.end_allowed[t] ? 0.0 : kLogZero;
  for (int i = n - 2; i >= 0; --i) {
    for (int t = 0; t < y; ++t) {
      for (int q = 0; q < y; ++q)
        cand[q] = lat.transition(t, q) + lat.unary(i + 1, q) + fb.beta(i + 1, q);
      fb.beta(i, t) = log_sum_exp(cand);
    }
  }
  return fb;
}

double log_partition(const PotentialLattice& lat) {
  return forward_backward(lat).log_z;
}

Matrix tag_marginals(const PotentialLattice& lat, const FbTables& fb) {
  Matrix m(lat.length, lat.num_tags, 0.0);
  for (int i = 0; i < lat.length; ++i) {
    for (int t = 0; t < lat.num_tags; ++t) {
      double a = fb.alpha(i, t);
      double b = fb.beta(i, t);
      if (is_impossible(a) || is_impossible(b)) continue;
      m(i, t) = std::exp(a + b - fb.log_z);
    }
  }
  return m;
}

Matrix tag_marginals(const PotentialLattice& lat) {
  return tag_marginals(lat, forward_backward(lat));
}

Matrix pairwise_marginals_at(const PotentialLattice& lat, const FbTables& fb,
                             int i) {
  Matrix p(lat.num_tags, lat.num_tags, 0.0);
  for (int a = 0; a < lat.num_tags; ++a) {
    if (is_impossible(fb.alpha(i, a))) continue;
    for (int b = 0; b < lat.num_tags; ++b) {
      double t = lat.transition(a, b);
      if (is_impossible(t) || is_impossible(fb.beta(i + 1, b))) continue;
      p(a, b) = std::exp(fb.alpha(i, a) + t + lat.unary(i + 1, b) +
                         fb.beta(i + 1, b) - fb.log_z);
    }
  }
  return p;
}

Matrix pairwise_marginal_sums(const PotentialLattice& lat, const FbTables& fb) {
  Matrix sums(lat.num_tags, lat.num_tags, 0.0);
  for (int i = 0; i + 1 < lat.length; ++i) {
    Matrix p = pairwise_marginals_at(lat, fb, i);
    for (std::size_t k = 0; k < sums.data.size(); ++k) sums.data[k] += p.data[k];
  }
  return sums;
}

PotentialLattice apply_observations(const PotentialLattice& lat,
                                    const ObservedTags& observed) {
  PotentialLattice restricted = lat;
  for (const auto& [position, tag] : observed.observations) {
    if (position < 1 || position > lat.length) {
      fail(ErrorCode::invalid_argument,
           "observation position " + std::to_string(position) +
               " outside sentence of length " + std::to_string(lat.length));
    }
    if (tag < 0 || tag >= lat.num_tags) {
      fail(ErrorCode::invalid_argument, "observed tag index out of range");
    }
    for (int t = 0; t < lat.num_tags; ++t) {
      if (t != tag) restricted.unary(position - 1, t) = kLogZero;
    }
  }
  return restricted;
}

double constrained_log_partition(const PotentialLattice& lat,
                                 const ObservedTags& observed) {
  PotentialLattice restricted = apply_observations(lat, observed);
  try {
    return forward_backward(restricted).log_z;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::no_valid_path) throw;
    // Rerun the forward pass to name the earliest position where all mass
    // dies; that is where the observations became unsatisfiable.
    const int n = restricted.length;
    const int y = restricted.num_tags;
    Matrix alpha(n, y, kLogZero);
    std::vector<double> cand(y);
    int dead_at = n;
    for (int t = 0; t < y; ++t)
      alpha(0, t) = restricted.mask.start_allowed[t] ? restricted.unary(0, t) : kLogZero;
    for (int i = 0; i < n; ++i) {
      if (i > 0) {
        for (int t = 0; t < y; ++t) {
          for (int p = 0; p < y; ++p)
            cand[p] = alpha(i - 1, p) + restricted.transition(p, t);
          double lse = log_sum_exp(cand);
          alpha(i, t) = is_impossible(lse) ? kLogZero : lse + restricted.unary(i, t);
        }
      }
      bool alive = false;
      for (int t = 0; t < y; ++t)
        if (!is_impossible(alpha(i, t))) alive = true;
      if (!alive) {
        dead_at = i + 1;
        break;
      }
    }
    fail(ErrorCode::unsatisfiable,
         "observations admit no valid tagging (path mass dies at position " +
             std::to_string(dead_at) + ")");
  }
}

double expected_entity_count(const Matrix& marginals, int o_index) {
  double e = 0.0;
  for (int i = 0; i < marginals.rows; ++i) e += 1.0 - marginals(i, o_index);
  return e;
}

double expected_entity_count(const PotentialLattice& lat, int o_index) {
  return expected_entity_count(tag_marginals(lat), o_index);
}

ViterbiResult viterbi(const PotentialLattice& lat, double o_bias, int o_index) {
  check_lattice(lat);
  if (o_bias < 0) fail(ErrorCode::invalid_argument, "o_bias must be >= 0");
  const int n = lat.length;
  const int y = lat.num_tags;
  auto biased_unary = [&](int i, int t) {
    return t == o_index ? lat.unary(i, t) - o_bias : lat.unary(i, t);
  };

  Matrix delta(n, y, kLogZero);
  std::vector<std::vector<int>> back(n, std::vector<int>(y, -1));
  for (int t = 0; t < y; ++t)
    delta(0, t) = lat.mask.start_allowed[t] ? biased_unary(0, t) : kLogZero;
  for (int i = 1; i < n; ++i) {
    for (int t = 0; t < y; ++t) {
      double best = kLogZero;
      int arg = -1;
      for (int p = 0; p < y; ++p) {
        if (is_impossible(delta(i - 1, p)) || is_impossible(lat.transition(p, t)))
          continue;
        double s = delta(i - 1, p) + lat.transition(p, t);
        if (arg < 0 || s > best) {  // strict: keeps the lowest index on ties
          best = s;
          arg = p;
        }
      }
      if (arg >= 0) {
        delta(i, t) = best + biased_unary(i, t);
        back[i][t] = arg;
      }
    }
  }

  double best = kLogZero;
  int arg = -1;
  for (int t = 0; t < y; ++t) {
    if (!lat.mask.end_allowed[t] || is_impossible(delta(n - 1, t))) continue;
    if (arg < 0 || delta(n - 1, t) > best) {
      best = delta(n - 1, t);
      arg = t;
    }
  }
  if (arg < 0) fail(ErrorCode::no_valid_path, "no mask-valid tagging exists");

  ViterbiResult result;
  result.score = best;
  result.tags.assign(n, 0);
  result.tags[n - 1] = arg;
  for (int i = n - 1; i > 0; --i) result.tags[i - 1] = back[i][result.tags[i]];
  return result;
}

LatticeGradients backprop_forward_backward(const PotentialLattice& lat,
                                           const FbTables& fb,
                                           const Matrix& marginal_adjoint,
                                           double log_z_adjoint) {
  const int n = lat.length;
  const int y = lat.num_tags;
  LatticeGradients grads;
  grads.d_unary = Matrix(n, y, 0.0);
  grads.d_transition = Matrix(y, y, 0.0);

  Matrix a_adj(n, y, 0.0);
  Matrix b_adj(n, y, 0.0);
  double z_adj = log_z_adjoint;

  // Marginals m = exp(alpha + beta - log_z) fan out into alpha, beta, log_z.
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < y; ++t) {
      double up = marginal_adjoint(i, t);
      if (up == 0.0) continue;
      double a = fb.alpha(i, t);
      double b = fb.beta(i, t);
      if (is_impossible(a) || is_impossible(b)) continue;
      double m = std::exp(a + b - fb.log_z);
      a_adj(i, t) += up * m;
      b_adj(i, t) += up * m;
      z_adj -= up * m;
    }
  }

  // log_z = LSE_t(alpha[n-1][t] + end[t]); softmax weights equal m[n-1].
  for (int t = 0; t < y; ++t) {
    double a = fb.alpha(n - 1, t);
    double b = fb.beta(n - 1, t);
    if (is_impossible(a) || is_impossible(b)) continue;
    a_adj(n - 1, t) += z_adj * std::exp(a + b - fb.log_z);
  }

  // Beta chain: beta[i] was computed from beta[i+1], so adjoints flow with
  // increasing i.
  for (int i = 0; i + 1 < n; ++i) {
    for (int t = 0; t < y; ++t) {
      double up = b_adj(i, t);
      if (up == 0.0 || is_impossible(fb.beta(i, t))) continue;
      for (int q = 0; q < y; ++q) {
        double tr = lat.transition(t, q);
        double bq = fb.beta(i + 1, q);
        if (is_impossible(tr) || is_impossible(bq)) continue;
        double w = std::exp(tr + lat.unary(i + 1, q) + bq - fb.beta(i, t));
        double contrib = up * w;
        grads.d_transition(t, q) += contrib;
        grads.d_unary(i + 1, q) += contrib;
        b_adj(i + 1, q) += contrib;
      }
    }
  }

  // Alpha chain flows with decreasing i.
  for (int i = n - 1; i >= 1; --i) {
    for (int t = 0; t < y; ++t) {
      double up = a_adj(i, t);
      if (up == 0.0 || is_impossible(fb.alpha(i, t))) continue;
      grads.d_unary(i, t) += up;
      double lse = fb.alpha(i, t) - lat.unary(i, t);
      for (int p = 0; p < y; ++p) {
        double ap = fb.alpha(i - 1, p);
        double tr = lat.transition(p, t);
        if (is_impossible(ap) || is_impossible(tr)) continue;
        double w = std::exp(ap + tr - lse);
        double contrib = up * w;
        a_adj(i - 1, p) += contrib;
        grads.d_transition(p, t) += contrib;
      }
    }
  }
  for (int t = 0; t < y; ++t) {
    if (!is_impossible(fb.alpha(0, t))) grads.d_unary(0, t) += a_adj(0, t);
  }
  return grads;
}

LatticeGradients backward_adjoints(const PotentialLattice& lat,
                                   LatticeScalar scalar, double upstream,
                                   const ObservedTags* observed, int o_index) {
  switch (scalar) {
    case LatticeScalar::log_partition: {
      FbTables fb = forward_backward(lat);
      LatticeGradients grads;
      grads.d_unary = tag_marginals(lat, fb);
      grads.d_transition = pairwise_marginal_sums(lat, fb);
      for (double& v : grads.d_unary.data) v *= upstream;
      for (double& v : grads.d_transition.data) v *= upstream;
      return grads;
    }
    case LatticeScalar::constrained_log_partition: {
      if (observed == nullptr)
        fail(ErrorCode::invalid_argument, "constrained gradients need observations");
      PotentialLattice restricted = apply_observations(lat, *observed);
      LatticeGradients grads =
          backward_adjoints(restricted, LatticeScalar::log_partition, upstream);
      // Unary entries excluded by the observations are constants of the
      // restricted lattice; their gradient w.r.t. the original unary is 0,
      // which the restricted marginals already give.
      return grads;
    }
    case LatticeScalar::expected_entity_count: {
      if (o_index < 0) fail(ErrorCode::invalid_argument, "o_index required");
      FbTables fb = forward_backward(lat);
      Matrix m_adj(lat.length, lat.num_tags, upstream);
      for (int i = 0; i < lat.length; ++i) m_adj(i, o_index) = 0.0;
      return backprop_forward_backward(lat, fb, m_adj, 0.0);
    }
  }
  fail(ErrorCode::invalid_argument, "unknown lattice scalar");
}

}  // namespace eertag
