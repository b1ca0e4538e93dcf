#include "qmlab/tnet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "qmlab/error.hpp"
#include "qmlab/parallel.hpp"

namespace qmlab {

namespace {

using RowMajorC = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::size_t element_count(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int s : shape) {
    require(s >= 1, ErrorCode::kBadDimension, "tensor legs must have dimension >= 1");
    n *= static_cast<std::size_t>(s);
  }
  return n;
}

std::vector<std::size_t> strides_of(const std::vector<int>& shape) {
  std::vector<std::size_t> st(shape.size(), 1);
  for (int k = static_cast<int>(shape.size()) - 2; k >= 0; --k)
    st[static_cast<std::size_t>(k)] = st[static_cast<std::size_t>(k) + 1] * static_cast<std::size_t>(shape[static_cast<std::size_t>(k) + 1]);
  return st;
}

void count(ContractionStats* stats, std::uint64_t n) {
  if (stats) stats->multiply_adds += n;
}

// Rotates each column of u so its largest-magnitude entry is real positive,
// applying the same phase to v so that u s v† is unchanged.
void fix_phases(CMatrix& u, CMatrix& v) {
  for (Eigen::Index k = 0; k < u.cols(); ++k) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < u.rows(); ++i)
      if (std::abs(u(i, k)) > std::abs(u(best, k))) best = i;
    const double mag = std::abs(u(best, k));
    if (mag == 0) continue;
    const Complex ph = std::conj(u(best, k) / mag);
    u.col(k) *= ph;
    v.col(k) *= ph;
  }
}

}  // namespace

DenseTensor DenseTensor::zeros(std::vector<int> shape) {
  DenseTensor t;
  t.data.assign(element_count(shape), Complex(0));
  t.shape = std::move(shape);
  return t;
}

DenseTensor DenseTensor::from_vector(const CVector& v, int legs, int leg_dim) {
  DenseTensor t = zeros(std::vector<int>(static_cast<std::size_t>(legs), leg_dim));
  require(static_cast<std::size_t>(v.size()) == t.size(), ErrorCode::kLengthMismatch,
          "vector length does not match the tensor shape");
  for (std::size_t i = 0; i < t.size(); ++i) t.data[i] = v(static_cast<Eigen::Index>(i));
  return t;
}

Complex& DenseTensor::at(const std::vector<int>& index) {
  require(index.size() == shape.size(), ErrorCode::kLengthMismatch, "index rank mismatch");
  std::size_t off = 0;
  for (std::size_t k = 0; k < shape.size(); ++k) {
    require(index[k] >= 0 && index[k] < shape[k], ErrorCode::kTargetOutOfRange, "tensor index out of range");
    off = off * static_cast<std::size_t>(shape[k]) + static_cast<std::size_t>(index[k]);
  }
  return data[off];
}

Complex DenseTensor::at(const std::vector<int>& index) const { return const_cast<DenseTensor*>(this)->at(index); }

double DenseTensor::norm() const {
  double s = 0;
  for (const auto& z : data) s += std::norm(z);
  return std::sqrt(s);
}

CVector DenseTensor::flat() const {
  CVector v(static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) v(static_cast<Eigen::Index>(i)) = data[i];
  return v;
}

void DenseTensor::validate() const {
  require(element_count(shape) == data.size(), ErrorCode::kDimensionMismatch,
          "tensor element count differs from the shape product");
}

DenseTensor permute(const DenseTensor& t, const std::vector<int>& order) {
  t.validate();
  const std::size_t r = t.shape.size();
  require(order.size() == r, ErrorCode::kLengthMismatch, "permutation rank mismatch");
  std::vector<int> seen(r, 0);
  for (int o : order) {
    require(o >= 0 && static_cast<std::size_t>(o) < r && !seen[static_cast<std::size_t>(o)], ErrorCode::kInvalidArgument,
            "not a permutation");
    seen[static_cast<std::size_t>(o)] = 1;
  }
  std::vector<int> shape(r);
  for (std::size_t k = 0; k < r; ++k) shape[k] = t.shape[static_cast<std::size_t>(order[k])];
  DenseTensor out = DenseTensor::zeros(shape);
  const auto old_strides = strides_of(t.shape);
  std::vector<std::size_t> step(r);
  for (std::size_t k = 0; k < r; ++k) step[k] = old_strides[static_cast<std::size_t>(order[k])];
  std::vector<int> idx(r, 0);
  std::size_t src = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.data[i] = t.data[src];
    for (int k = static_cast<int>(r) - 1; k >= 0; --k) {
      const auto uk = static_cast<std::size_t>(k);
      if (++idx[uk] < shape[uk]) {
        src += step[uk];
        break;
      }
      src -= step[uk] * static_cast<std::size_t>(shape[uk] - 1);
      idx[uk] = 0;
    }
  }
  return out;
}

DenseTensor tensordot(const DenseTensor& a, const std::vector<int>& axes_a, const DenseTensor& b,
                      const std::vector<int>& axes_b) {
  require(axes_a.size() == axes_b.size(), ErrorCode::kLengthMismatch, "contracted leg lists differ in length");
  std::vector<int> free_a, free_b;
  for (int k = 0; k < a.rank(); ++k)
    if (std::find(axes_a.begin(), axes_a.end(), k) == axes_a.end()) free_a.push_back(k);
  for (int k = 0; k < b.rank(); ++k)
    if (std::find(axes_b.begin(), axes_b.end(), k) == axes_b.end()) free_b.push_back(k);
  std::size_t inner = 1;
  for (std::size_t k = 0; k < axes_a.size(); ++k) {
    require(a.shape.at(static_cast<std::size_t>(axes_a[k])) == b.shape.at(static_cast<std::size_t>(axes_b[k])),
            ErrorCode::kDimensionMismatch, "contracted legs differ in dimension");
    inner *= static_cast<std::size_t>(a.shape[static_cast<std::size_t>(axes_a[k])]);
  }
  std::vector<int> oa = free_a, ob = axes_b;
  oa.insert(oa.end(), axes_a.begin(), axes_a.end());
  ob.insert(ob.end(), free_b.begin(), free_b.end());
  const DenseTensor pa = permute(a, oa), pb = permute(b, ob);
  const auto rows = static_cast<Eigen::Index>(pa.size() / inner);
  const auto cols = static_cast<Eigen::Index>(pb.size() / inner);
  const auto k = static_cast<Eigen::Index>(inner);
  Eigen::Map<const RowMajorC> ma(pa.data.data(), rows, k);
  Eigen::Map<const RowMajorC> mb(pb.data.data(), k, cols);
  std::vector<int> shape;
  for (int f : free_a) shape.push_back(a.shape[static_cast<std::size_t>(f)]);
  for (int f : free_b) shape.push_back(b.shape[static_cast<std::size_t>(f)]);
  DenseTensor out = DenseTensor::zeros(shape);
  Eigen::Map<RowMajorC>(out.data.data(), rows, cols) = ma * mb;
  return out;
}

std::vector<int> MPS::bonds() const {
  std::vector<int> b;
  for (const auto& s : sites) b.push_back(static_cast<int>(s.front().rows()));
  if (!sites.empty()) b.push_back(static_cast<int>(sites.back().front().cols()));
  return b;
}

int MPS::max_bond() const {
  const auto b = bonds();
  return b.empty() ? 0 : *std::max_element(b.begin(), b.end());
}

void MPS::validate() const {
  require(!sites.empty(), ErrorCode::kInvalidArgument, "MPS has no sites");
  for (std::size_t j = 0; j < sites.size(); ++j) {
    require(!sites[j].empty(), ErrorCode::kDimensionMismatch, "MPS site without physical index");
    for (const auto& m : sites[j])
      require(m.rows() == sites[j].front().rows() && m.cols() == sites[j].front().cols(),
              ErrorCode::kDimensionMismatch, "MPS site matrices differ in shape");
    if (j + 1 < sites.size())
      require(sites[j].front().cols() == sites[j + 1].front().rows(), ErrorCode::kDimensionMismatch,
              "MPS bond dimensions do not chain");
  }
  require(sites.front().front().rows() == 1 && sites.back().front().cols() == 1, ErrorCode::kDimensionMismatch,
          "MPS boundary bonds must be 1");
}

void MPS::scale(Complex c) {
  for (auto& m : sites.front()) m *= c;
}

std::string MPS::to_json() const {
  validate();
  nlohmann::json j;
  j["sites"] = nlohmann::json::array();
  for (const auto& s : sites) {
    const auto dl = s.front().rows(), dr = s.front().cols();
    nlohmann::json data = nlohmann::json::array();
    for (Eigen::Index l = 0; l < dl; ++l)
      for (std::size_t p = 0; p < s.size(); ++p)
        for (Eigen::Index r = 0; r < dr; ++r) data.push_back({s[p](l, r).real(), s[p](l, r).imag()});
    j["sites"].push_back({{"shape", {dl, s.size(), dr}}, {"data", data}});
  }
  return j.dump();
}

MPS MPS::from_json(const std::string& text) {
  MPS m;
  try {
    const auto j = nlohmann::json::parse(text);
    for (const auto& site : j.at("sites")) {
      const auto shape = site.at("shape").get<std::vector<int>>();
      require(shape.size() == 3, ErrorCode::kBadConfig, "MPS site shape must have three entries");
      const auto& data = site.at("data");
      require(data.size() == element_count(shape), ErrorCode::kBadConfig, "MPS site data size mismatch");
      std::vector<CMatrix> s(static_cast<std::size_t>(shape[1]), CMatrix::Zero(shape[0], shape[2]));
      std::size_t k = 0;
      for (int l = 0; l < shape[0]; ++l)
        for (int p = 0; p < shape[1]; ++p)
          for (int r = 0; r < shape[2]; ++r, ++k)
            s[static_cast<std::size_t>(p)](l, r) = Complex(data[k].at(0).get<double>(), data[k].at(1).get<double>());
      m.sites.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kBadConfig, std::string("MPS JSON: ") + e.what());
  }
  try {
    m.validate();
  } catch (const Error& e) {
    fail(ErrorCode::kBadConfig, e.what());
  }
  return m;
}

MPS product_mps(const std::vector<CVector>& factors) {
  MPS m;
  for (const auto& f : factors) {
    require(f.size() >= 1, ErrorCode::kBadDimension, "empty product factor");
    std::vector<CMatrix> s;
    for (Eigen::Index p = 0; p < f.size(); ++p) s.push_back(CMatrix::Constant(1, 1, f(p)));
    m.sites.push_back(std::move(s));
  }
  m.validate();
  return m;
}

MPS random_mps(int sites, int d, int bond, Rng& rng, bool clip) {
  require(sites >= 1 && d >= 1 && bond >= 1, ErrorCode::kInvalidArgument, "bad random MPS parameters");
  auto bond_at = [&](int j) {
    if (j == 0 || j == sites) return 1;
    if (!clip) return bond;
    long long cap = 1;
    for (int k = 0; k < std::min(j, sites - j) && cap < bond; ++k) cap *= d;
    return static_cast<int>(std::min<long long>(bond, cap));
  };
  MPS m;
  for (int j = 0; j < sites; ++j) {
    std::vector<CMatrix> s;
    for (int p = 0; p < d; ++p) {
      CMatrix a(bond_at(j), bond_at(j + 1));
      for (Eigen::Index r = 0; r < a.rows(); ++r)
        for (Eigen::Index c = 0; c < a.cols(); ++c) a(r, c) = Complex(rng.normal(), rng.normal()) / std::sqrt(2.0);
      s.push_back(std::move(a));
    }
    m.sites.push_back(std::move(s));
  }
  return m;
}

MPS mps_from_tensor(const DenseTensor& t, int dmax, std::vector<double>* discarded, double rel_cutoff) {
  t.validate();
  require(t.rank() >= 2, ErrorCode::kInvalidArgument, "MPS decomposition needs at least two legs");
  if (discarded) discarded->clear();
  const auto& dims = t.shape;
  const int n = t.rank();
  std::size_t rest = t.size() / static_cast<std::size_t>(dims[0]);
  CMatrix m(dims[0], static_cast<Eigen::Index>(rest));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(i, c) = t.data[static_cast<std::size_t>(i) * rest + static_cast<std::size_t>(c)];
  MPS out;
  Eigen::Index dl = 1;
  for (int j = 0; j + 1 < n; ++j) {
    const int d = dims[static_cast<std::size_t>(j)];
    Eigen::BDCSVD<CMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RVector& s = svd.singularValues();
    Eigen::Index keep = 1;
    while (keep < s.size() && s(keep) > rel_cutoff * s(0)) ++keep;
    if (dmax > 0) keep = std::min<Eigen::Index>(keep, dmax);
    if (discarded) discarded->push_back(s.tail(s.size() - keep).norm());
    CMatrix u = svd.matrixU().leftCols(keep);
    CMatrix v = svd.matrixV().leftCols(keep);
    fix_phases(u, v);
    std::vector<CMatrix> site(static_cast<std::size_t>(d), CMatrix(dl, keep));
    for (int p = 0; p < d; ++p)
      for (Eigen::Index l = 0; l < dl; ++l) site[static_cast<std::size_t>(p)].row(l) = u.row(l * d + p);
    out.sites.push_back(std::move(site));
    const CMatrix r = s.head(keep).asDiagonal() * v.adjoint();
    const int dn = dims[static_cast<std::size_t>(j) + 1];
    const std::size_t next_rest = rest / static_cast<std::size_t>(dn);
    CMatrix next(keep * dn, static_cast<Eigen::Index>(next_rest));
    for (Eigen::Index b = 0; b < keep; ++b)
      for (int i = 0; i < dn; ++i)
        for (std::size_t c = 0; c < next_rest; ++c)
          next(b * dn + i, static_cast<Eigen::Index>(c)) = r(b, static_cast<Eigen::Index>(static_cast<std::size_t>(i) * next_rest + c));
    m = std::move(next);
    rest = next_rest;
    dl = keep;
  }
  const int d = dims.back();
  std::vector<CMatrix> last(static_cast<std::size_t>(d), CMatrix(dl, 1));
  for (int p = 0; p < d; ++p)
    for (Eigen::Index l = 0; l < dl; ++l) last[static_cast<std::size_t>(p)](l, 0) = m(l * d + p, 0);
  out.sites.push_back(std::move(last));
  return out;
}

DenseTensor contract(const MPS& mps, ContractionStats* stats) {
  mps.validate();
  CMatrix c = CMatrix::Ones(1, 1);
  std::vector<int> shape;
  for (const auto& site : mps.sites) {
    const auto d = static_cast<Eigen::Index>(site.size());
    CMatrix next(c.rows() * d, site.front().cols());
    for (Eigen::Index p = 0; p < d; ++p) {
      const CMatrix block = c * site[static_cast<std::size_t>(p)];
      for (Eigen::Index r = 0; r < c.rows(); ++r) next.row(r * d + p) = block.row(r);
    }
    count(stats, static_cast<std::uint64_t>(c.rows() * c.cols() * site.front().cols() * d));
    c = std::move(next);
    shape.push_back(static_cast<int>(d));
  }
  DenseTensor t = DenseTensor::zeros(shape);
  for (std::size_t i = 0; i < t.size(); ++i) t.data[i] = c(static_cast<Eigen::Index>(i), 0);
  return t;
}

namespace {

double norm_naive(const MPS& mps, ContractionStats* stats) {
  const DenseTensor t = contract(mps, stats);
  count(stats, t.size());
  return t.norm();
}

double norm_parallel(const MPS& mps, ContractionStats* stats, int threads) {
  std::vector<CMatrix> level(mps.sites.size());
  for (std::size_t j = 0; j < mps.sites.size(); ++j) {
    const auto& site = mps.sites[j];
    CMatrix e = CMatrix::Zero(site.front().rows() * site.front().rows(), site.front().cols() * site.front().cols());
    for (const auto& a : site) e += kron(a, a.conjugate());
    count(stats, static_cast<std::uint64_t>(e.size()) * site.size());
    level[j] = std::move(e);
  }
  while (level.size() > 1) {
    const std::size_t pairs = level.size() / 2;
    std::vector<CMatrix> next((level.size() + 1) / 2);
    for (std::size_t i = 0; i < pairs; ++i)
      count(stats, static_cast<std::uint64_t>(level[2 * i].rows() * level[2 * i].cols() * level[2 * i + 1].cols()));
    parallel_for(pairs, threads, [&](std::size_t i) { next[i] = level[2 * i] * level[2 * i + 1]; });
    if (level.size() % 2) next.back() = level.back();
    level = std::move(next);
  }
  return std::sqrt(std::max(0.0, level.front()(0, 0).real()));
}

}  // namespace

Complex mps_inner(const MPS& a, const MPS& b, ContractionStats* stats) {
  a.validate();
  b.validate();
  require(a.size() == b.size(), ErrorCode::kLengthMismatch, "MPS lengths differ");
  CMatrix env = CMatrix::Ones(1, 1);
  for (std::size_t j = 0; j < a.sites.size(); ++j) {
    const auto& sa = a.sites[j];
    const auto& sb = b.sites[j];
    require(sa.size() == sb.size(), ErrorCode::kDimensionMismatch, "physical dimensions differ");
    CMatrix next = CMatrix::Zero(sa.front().cols(), sb.front().cols());
    for (std::size_t p = 0; p < sa.size(); ++p) {
      const CMatrix half = env * sb[p];
      next.noalias() += sa[p].adjoint() * half;
      count(stats, static_cast<std::uint64_t>(env.rows() * env.cols() * half.cols() + sa[p].cols() * sa[p].rows() * half.cols()));
    }
    env = std::move(next);
  }
  return env(0, 0);
}

double mps_norm(const MPS& mps, NormScheme scheme, ContractionStats* stats, int threads) {
  mps.validate();
  switch (scheme) {
    case NormScheme::kNaive:
      return norm_naive(mps, stats);
    case NormScheme::kParallel:
      return norm_parallel(mps, stats, threads);
    case NormScheme::kSequential:
      break;
  }
  return std::sqrt(std::max(0.0, mps_inner(mps, mps, stats).real()));
}

std::array<TeleportBranch, 4> teleport_network(const CVector& psi) {
  require(psi.size() == 2, ErrorCode::kBadDimension, "teleportation input must be a qubit");
  require(std::abs(psi.norm() - 1) < 1e-10, ErrorCode::kNotNormalized, "teleportation input must be normalized");
  const double h = 1 / std::sqrt(2.0);
  DenseTensor hadamard = DenseTensor::zeros({2, 2});
  hadamard.data = {h, h, h, -h};
  DenseTensor cnot = DenseTensor::zeros({2, 2, 2, 2});  // (out_c, out_t, in_c, in_t)
  for (int c = 0; c < 2; ++c)
    for (int t = 0; t < 2; ++t) cnot.at({c, t ^ c, c, t}) = 1;

  // |ψ> ⊗ |00>: a vector leg times a two-leg tensor.
  DenseTensor in = DenseTensor::zeros({2});
  in.data = {psi(0), psi(1)};
  DenseTensor pair = DenseTensor::zeros({2, 2});
  pair.data[0] = 1;
  DenseTensor state = tensordot(in, {}, pair, {});

  auto apply = [](const DenseTensor& gate, const std::vector<int>& legs, const DenseTensor& s) {
    const int k = static_cast<int>(legs.size());
    std::vector<int> in_axes;
    for (int i = 0; i < k; ++i) in_axes.push_back(k + i);
    const DenseTensor r = tensordot(gate, in_axes, s, legs);
    std::vector<int> order(static_cast<std::size_t>(s.rank()));
    int free = k;
    for (int p = 0; p < s.rank(); ++p) {
      const auto it = std::find(legs.begin(), legs.end(), p);
      order[static_cast<std::size_t>(p)] = it != legs.end() ? static_cast<int>(it - legs.begin()) : free++;
    }
    return permute(r, order);
  };
  state = apply(hadamard, {1}, state);
  state = apply(cnot, {1, 2}, state);
  state = apply(cnot, {0, 1}, state);
  state = apply(hadamard, {0}, state);

  std::array<TeleportBranch, 4> out;
  for (int m0 = 0; m0 < 2; ++m0) {
    for (int m1 = 0; m1 < 2; ++m1) {
      DenseTensor b0 = DenseTensor::zeros({2}), b1 = DenseTensor::zeros({2});
      b0.data[static_cast<std::size_t>(m0)] = 1;
      b1.data[static_cast<std::size_t>(m1)] = 1;
      // Measurement outcomes are contractions with basis bras.
      const DenseTensor bob = tensordot(b1, {0}, tensordot(b0, {0}, state, {0}), {0});
      CVector v = bob.flat();
      auto& br = out[static_cast<std::size_t>(2 * m0 + m1)];
      br.m0 = m0;
      br.m1 = m1;
      br.probability = v.squaredNorm();
      if (m1) std::swap(v(0), v(1));
      if (m0) v(1) = -v(1);
      br.bob = br.probability > 0 ? CVector(v / v.norm()) : v;
    }
  }
  return out;
}

}  // namespace qmlab
