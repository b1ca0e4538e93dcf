#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qmlab/error.hpp"
#include "qmlab/parallel.hpp"
#include "qmlab/tnet.hpp"

namespace qmlab {

namespace {

using Cores = std::vector<std::vector<RMatrix>>;

std::uint64_t upow(std::uint64_t b, int e) {
  std::uint64_t r = 1;
  while (e-- > 0) r *= b;
  return r;
}

double binom(int n, int k) {
  double r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// M_j[o] = Σ_s φ_s P_j[o, s] for a product embedding.
std::vector<RMatrix> site_matrices(const ProjectorMPS& p, int j, const RVector& phi) {
  const auto& core = p.cores[static_cast<std::size_t>(j)];
  std::vector<RMatrix> m;
  for (int o = 0; o < p.out_dim(j); ++o) {
    RMatrix a = RMatrix::Zero(core.front().rows(), core.front().cols());
    for (int s = 0; s < p.d; ++s) a += phi(s) * core[static_cast<std::size_t>(o * p.d + s)];
    m.push_back(std::move(a));
  }
  return m;
}

// Left and right environments of the norm network built from per-site
// matrix lists: left[j] covers sites < j, right[j] covers sites > j.
void environments(const std::vector<std::vector<RMatrix>>& m, std::vector<RMatrix>& left, std::vector<RMatrix>& right) {
  const std::size_t n = m.size();
  left.assign(n + 1, RMatrix());
  right.assign(n, RMatrix());
  left[0] = RMatrix::Ones(1, 1);
  for (std::size_t j = 0; j < n; ++j) {
    RMatrix next = RMatrix::Zero(m[j].front().cols(), m[j].front().cols());
    for (const auto& a : m[j]) next.noalias() += a.transpose() * left[j] * a;
    left[j + 1] = std::move(next);
  }
  right[n - 1] = RMatrix::Ones(1, 1);
  for (std::size_t j = n - 1; j > 0; --j) {
    RMatrix next = RMatrix::Zero(m[j].front().rows(), m[j].front().rows());
    for (const auto& a : m[j]) next.noalias() += a * right[j] * a.transpose();
    right[j - 1] = std::move(next);
  }
}

void check_sample(const ProjectorMPS& p, const std::vector<double>& x) {
  require(static_cast<int>(x.size()) == p.sites(), ErrorCode::kLengthMismatch,
          "sample length differs from the number of projector sites");
}

struct LossParts {
  double data = 0;
  double log_frobenius = 0;
};

LossParts loss_parts(const ProjectorMPS& p, const std::vector<std::vector<double>>& train) {
  LossParts parts;
  for (const auto& x : train) {
    const double s = anomaly_score(p, x);
    const double dx = s * s;
    if (!(dx > 0)) {
      parts.data = std::numeric_limits<double>::infinity();
      break;
    }
    parts.data += std::abs(std::log(dx) - 1);
  }
  parts.data /= static_cast<double>(train.size());
  parts.log_frobenius = std::log(p.frobenius_norm());
  return parts;
}

}  // namespace

RVector site_embedding(double x, int d) {
  require(d >= 2, ErrorCode::kBadDimension, "embedding dimension must be >= 2");
  const double c = std::cos(std::numbers::pi * x / 2), s = std::sin(std::numbers::pi * x / 2);
  RVector phi(d);
  for (int k = 0; k < d; ++k) phi(k) = std::sqrt(binom(d - 1, k)) * std::pow(c, d - 1 - k) * std::pow(s, k);
  return phi;
}

MPS embed_mps(const std::vector<double>& x, int d) {
  std::vector<CVector> f;
  for (double v : x) f.push_back(site_embedding(v, d).cast<Complex>());
  return product_mps(f);
}

std::uint64_t ProjectorMPS::output_dimension() const { return upow(static_cast<std::uint64_t>(d), sites() / stride); }

std::uint64_t ProjectorMPS::kernel_dimension_bound() const {
  return upow(static_cast<std::uint64_t>(d), sites()) - output_dimension();
}

void ProjectorMPS::validate() const {
  require(d >= 2 && stride >= 1, ErrorCode::kInvalidArgument, "bad projector parameters");
  require(sites() >= stride, ErrorCode::kInvalidArgument, "projector needs at least `stride` sites");
  for (int j = 0; j < sites(); ++j) {
    const auto& core = cores[static_cast<std::size_t>(j)];
    require(static_cast<int>(core.size()) == out_dim(j) * d, ErrorCode::kDimensionMismatch, "projector core size");
    for (const auto& m : core)
      require(m.rows() == core.front().rows() && m.cols() == core.front().cols(), ErrorCode::kDimensionMismatch,
              "projector core shapes differ");
    if (j + 1 < sites())
      require(core.front().cols() == cores[static_cast<std::size_t>(j) + 1].front().rows(),
              ErrorCode::kDimensionMismatch, "projector bonds do not chain");
  }
  require(cores.front().front().rows() == 1 && cores.back().front().cols() == 1, ErrorCode::kDimensionMismatch,
          "projector boundary bonds must be 1");
}

ProjectorMPS ProjectorMPS::random(int sites, int d, int stride, int bond, Rng& rng) {
  require(bond >= 1 && sites >= 1, ErrorCode::kInvalidArgument, "bad projector parameters");
  ProjectorMPS p;
  p.d = d;
  p.stride = stride;
  for (int j = 0; j < sites; ++j) {
    const int dl = j == 0 ? 1 : bond, dr = j + 1 == sites ? 1 : bond;
    std::vector<RMatrix> core;
    for (int k = 0; k < p.out_dim(j) * d; ++k) {
      RMatrix m(dl, dr);
      for (Eigen::Index r = 0; r < dl; ++r)
        for (Eigen::Index c = 0; c < dr; ++c) m(r, c) = rng.normal() / std::sqrt(static_cast<double>(dl * d));
      core.push_back(std::move(m));
    }
    p.cores.push_back(std::move(core));
  }
  p.validate();
  return p;
}

double ProjectorMPS::frobenius_norm() const {
  validate();
  RMatrix env = RMatrix::Ones(1, 1);
  for (const auto& core : cores) {
    RMatrix next = RMatrix::Zero(core.front().cols(), core.front().cols());
    for (const auto& a : core) next.noalias() += a.transpose() * env * a;
    env = std::move(next);
  }
  return std::sqrt(std::max(0.0, env(0, 0)));
}

RMatrix ProjectorMPS::dense() const {
  validate();
  require(sites() <= 10, ErrorCode::kInvalidArgument, "dense projector limited to 10 sites");
  // The projector as an MPS over the joint (o, s) leg of every site.
  MPS joint;
  for (const auto& core : cores) {
    std::vector<CMatrix> s;
    for (const auto& m : core) s.push_back(m.cast<Complex>());
    joint.sites.push_back(std::move(s));
  }
  const DenseTensor t = contract(joint);
  const auto rows = static_cast<Eigen::Index>(output_dimension());
  const auto cols = static_cast<Eigen::Index>(upow(static_cast<std::uint64_t>(d), sites()));
  RMatrix out = RMatrix::Zero(rows, cols);
  std::vector<int> digit(static_cast<std::size_t>(sites()), 0);
  for (std::size_t idx = 0; idx < t.size(); ++idx) {
    Eigen::Index r = 0, c = 0;
    for (int j = 0; j < sites(); ++j) {
      const int k = digit[static_cast<std::size_t>(j)];
      r = r * out_dim(j) + k / d;
      c = c * d + k % d;
    }
    out(r, c) = t.data[idx].real();
    for (int j = sites(); j-- > 0;) {
      if (++digit[static_cast<std::size_t>(j)] < out_dim(j) * d) break;
      digit[static_cast<std::size_t>(j)] = 0;
    }
  }
  return out;
}

double projected_norm(const ProjectorMPS& p, const MPS& phi, ContractionStats* stats) {
  p.validate();
  phi.validate();
  require(phi.size() == p.sites(), ErrorCode::kLengthMismatch, "input MPS length differs from the projector");
  MPS out;
  for (int j = 0; j < p.sites(); ++j) {
    const auto& in = phi.sites[static_cast<std::size_t>(j)];
    require(static_cast<int>(in.size()) == p.d, ErrorCode::kDimensionMismatch, "input physical dimension mismatch");
    const auto& core = p.cores[static_cast<std::size_t>(j)];
    std::vector<CMatrix> site;
    for (int o = 0; o < p.out_dim(j); ++o) {
      CMatrix a = CMatrix::Zero(core.front().rows() * in.front().rows(), core.front().cols() * in.front().cols());
      for (int s = 0; s < p.d; ++s)
        a += kron(core[static_cast<std::size_t>(o * p.d + s)].cast<Complex>(), in[static_cast<std::size_t>(s)]);
      if (stats) stats->multiply_adds += static_cast<std::uint64_t>(a.size()) * static_cast<std::uint64_t>(p.d);
      site.push_back(std::move(a));
    }
    out.sites.push_back(std::move(site));
  }
  return mps_norm(out, NormScheme::kSequential, stats);
}

double anomaly_score(const ProjectorMPS& p, const std::vector<double>& x, ContractionStats* stats) {
  check_sample(p, x);
  return projected_norm(p, embed_mps(x, p.d), stats);
}

std::vector<double> anomaly_scores(const ProjectorMPS& p, const std::vector<std::vector<double>>& xs, int threads,
                                   ContractionStats* stats) {
  std::vector<double> out(xs.size());
  std::vector<ContractionStats> local(xs.size());
  parallel_for(xs.size(), threads, [&](std::size_t i) { out[i] = anomaly_score(p, xs[i], &local[i]); });
  if (stats)
    for (const auto& s : local) stats->multiply_adds += s.multiply_adds;
  return out;
}

double anomaly_loss(const ProjectorMPS& p, const std::vector<std::vector<double>>& train, double alpha) {
  require(!train.empty(), ErrorCode::kInvalidArgument, "empty training set");
  const auto parts = loss_parts(p, train);
  return alpha == 0 ? parts.data : parts.data + alpha * parts.log_frobenius;
}

std::vector<std::vector<RMatrix>> anomaly_loss_gradient(const ProjectorMPS& p,
                                                        const std::vector<std::vector<double>>& train, double alpha) {
  require(!train.empty(), ErrorCode::kInvalidArgument, "empty training set");
  p.validate();
  const int n = p.sites();
  Cores grad;
  for (const auto& core : p.cores) grad.emplace_back(core.size(), RMatrix::Zero(core.front().rows(), core.front().cols()));
  std::vector<RMatrix> left, right;
  for (const auto& x : train) {
    check_sample(p, x);
    std::vector<RVector> phi;
    std::vector<std::vector<RMatrix>> m;
    for (int j = 0; j < n; ++j) {
      phi.push_back(site_embedding(x[static_cast<std::size_t>(j)], p.d));
      m.push_back(site_matrices(p, j, phi.back()));
    }
    environments(m, left, right);
    const double dx = left.back()(0, 0);
    const double r = std::log(dx) - 1;
    if (r == 0) continue;
    // d|ln D - 1| / dD, averaged over the batch.
    const double coef = (r > 0 ? 1.0 : -1.0) / (dx * static_cast<double>(train.size()));
    for (int j = 0; j < n; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      for (int o = 0; o < p.out_dim(j); ++o) {
        const RMatrix g = 2 * coef * left[uj] * m[uj][static_cast<std::size_t>(o)] * right[uj];
        for (int s = 0; s < p.d; ++s) grad[uj][static_cast<std::size_t>(o * p.d + s)] += phi[uj](s) * g;
      }
    }
  }
  if (alpha != 0) {
    environments(p.cores, left, right);
    const double f2 = left.back()(0, 0);
    for (int j = 0; j < n; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      for (std::size_t k = 0; k < p.cores[uj].size(); ++k)
        grad[uj][k] += alpha / f2 * left[uj] * p.cores[uj][k] * right[uj];
    }
  }
  return grad;
}

AnomalyFit anomaly_fit(const std::vector<std::vector<double>>& train, const AnomalyConfig& cfg) {
  require(!train.empty(), ErrorCode::kInvalidArgument, "empty training set");
  require(cfg.alpha >= 0 && cfg.step > 0 && cfg.iterations >= 0, ErrorCode::kInvalidArgument, "bad anomaly config");
  const int n = static_cast<int>(train.front().size());
  Rng rng(cfg.seed);
  AnomalyFit fit;
  fit.model = ProjectorMPS::random(n, cfg.d, cfg.stride, cfg.bond, rng);
  // Rescale so the mean training D(x) starts at 1.
  double mean = 0;
  for (const auto& x : train) mean += std::pow(anomaly_score(fit.model, x), 2);
  mean /= static_cast<double>(train.size());
  require(mean > 0, ErrorCode::kInvalidArgument, "degenerate initial projector");
  const double c = std::pow(mean, -1.0 / (2 * n));
  for (auto& core : fit.model.cores)
    for (auto& m : core) m *= c;

  double loss = anomaly_loss(fit.model, train, cfg.alpha);
  double step = cfg.step;
  for (int it = 0; it < cfg.iterations; ++it) {
    const auto grad = anomaly_loss_gradient(fit.model, train, cfg.alpha);
    bool accepted = false;
    for (int tries = 0; tries < 40 && !accepted; ++tries) {
      ProjectorMPS trial = fit.model;
      for (std::size_t j = 0; j < trial.cores.size(); ++j)
        for (std::size_t k = 0; k < trial.cores[j].size(); ++k) trial.cores[j][k] -= step * grad[j][k];
      const double l = anomaly_loss(trial, train, cfg.alpha);
      if (l < loss) {
        fit.model = std::move(trial);
        loss = l;
        accepted = true;
        step *= 1.5;
      } else {
        step *= 0.5;
      }
    }
    if (!accepted) break;
    fit.history.push_back(loss);
    ++fit.accepted;
  }
  fit.loss = loss;
  return fit;
}

}  // namespace qmlab
