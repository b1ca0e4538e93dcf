#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "qmlab/error.hpp"
#include "qmlab/rng.hpp"
#include "qmlab/tnet.hpp"
#include "support.hpp"

using namespace qmlab;

namespace {

const double kSqrtE = std::sqrt(std::numbers::e);

CVector random_vector(Eigen::Index n, Rng& rng) {
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(rng.normal(), rng.normal());
  return v;
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

Graph relabel(const Graph& g, const std::vector<int>& perm) {
  Graph h{g.vertices, {}};
  for (const auto& [u, v] : g.edges) h.edges.emplace_back(perm[static_cast<std::size_t>(u)], perm[static_cast<std::size_t>(v)]);
  return h;
}

std::vector<std::vector<double>> cluster(int m, int n, double center, double spread, Rng& rng) {
  std::vector<std::vector<double>> xs;
  for (int i = 0; i < m; ++i) {
    std::vector<double> x(static_cast<std::size_t>(n));
    for (auto& v : x) v = center + spread * rng.normal();
    xs.push_back(x);
  }
  return xs;
}

}  // namespace

TEST_CASE("dense tensor permute and tensordot") {
  Rng rng(1);
  DenseTensor a = DenseTensor::zeros({2, 3, 4});
  for (auto& z : a.data) z = Complex(rng.normal(), rng.normal());
  const DenseTensor p = permute(a, {2, 0, 1});
  CHECK(p.shape == std::vector<int>{4, 2, 3});
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 4; ++k) CHECK(p.at({k, i, j}) == a.at({i, j, k}));

  DenseTensor b = DenseTensor::zeros({4, 3, 5});
  for (auto& z : b.data) z = Complex(rng.normal(), rng.normal());
  const DenseTensor c = tensordot(a, {1, 2}, b, {1, 0});
  CHECK(c.shape == std::vector<int>{2, 5});
  for (int i = 0; i < 2; ++i)
    for (int l = 0; l < 5; ++l) {
      Complex s = 0;
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 4; ++k) s += a.at({i, j, k}) * b.at({k, j, l});
      CHECK(std::abs(c.at({i, l}) - s) < 1e-12);
    }
  CHECK_THROWS_AS(tensordot(a, {0}, b, {0}), Error);
  CHECK_THROWS_AS(permute(a, {0, 0, 1}), Error);
}

TEST_CASE("mps decomposition: product, GHZ and random roundtrip") {
  CVector zero = CVector::Zero(16);
  zero(0) = 1;
  const MPS prod = mps_from_tensor(DenseTensor::from_vector(zero, 4));
  for (int b : prod.bonds()) CHECK(b == 1);

  CVector ghz = CVector::Zero(16);
  ghz(0) = ghz(15) = 1 / std::sqrt(2.0);
  const MPS g = mps_from_tensor(DenseTensor::from_vector(ghz, 4));
  CHECK(g.bonds() == std::vector<int>{1, 2, 2, 2, 1});
  CHECK((contract(g).flat() - ghz).norm() < 1e-12);

  Rng rng(2);
  const CVector v = random_vector(256, rng);
  const DenseTensor t = DenseTensor::from_vector(v, 8);
  const MPS m = mps_from_tensor(t);
  CHECK(m.bonds() == std::vector<int>{1, 2, 4, 8, 16, 8, 4, 2, 1});
  CHECK((contract(m).flat() - v).norm() < 1e-10);

  // Deterministic phase convention.
  const MPS again = mps_from_tensor(t);
  for (int j = 0; j < m.size(); ++j)
    for (int p = 0; p < 2; ++p) CHECK(m.sites[static_cast<std::size_t>(j)][static_cast<std::size_t>(p)] == again.sites[static_cast<std::size_t>(j)][static_cast<std::size_t>(p)]);
  // Left-canonical cores: Σ_p A_p† A_p = I on every site but the last.
  for (int j = 0; j + 1 < m.size(); ++j) {
    const auto& s = m.sites[static_cast<std::size_t>(j)];
    CMatrix id = CMatrix::Zero(s.front().cols(), s.front().cols());
    for (const auto& a : s) id += a.adjoint() * a;
    CHECK(test::max_abs(id - CMatrix::Identity(id.rows(), id.cols())) < 1e-10);
  }
  CHECK_THROWS_AS(mps_from_tensor(DenseTensor::from_vector(CVector::Ones(2), 1)), Error);

  // Mixed leg dimensions.
  DenseTensor mixed = DenseTensor::zeros({3, 2, 4});
  for (auto& z : mixed.data) z = Complex(rng.normal(), rng.normal());
  CHECK((contract(mps_from_tensor(mixed)).flat() - mixed.flat()).norm() < 1e-10);
}

TEST_CASE("mps truncation keeps the largest singular values") {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 4 + trial % 5;
    const CVector v = random_vector(Eigen::Index{1} << n, rng);
    const DenseTensor t = DenseTensor::from_vector(v, n);
    for (int dmax : {1, 2, 3}) {
      std::vector<double> disc;
      const MPS m = mps_from_tensor(t, dmax, &disc);
      CHECK(m.max_bond() <= dmax);
      // With left-canonical sweeps the squared error is the sum of the
      // squared discarded weights over all bonds.
      double total = 0;
      for (double e : disc) total += e * e;
      CHECK((contract(m).flat() - v).norm() == doctest::Approx(std::sqrt(total)).epsilon(1e-9));
      // The first split is an Eckart-Young truncation of the dense unfolding.
      CMatrix unfold(2, Eigen::Index{1} << (n - 1));
      for (Eigen::Index i = 0; i < v.size(); ++i) unfold(i >> (n - 1), i & ((Eigen::Index{1} << (n - 1)) - 1)) = v(i);
      Eigen::JacobiSVD<CMatrix> svd(unfold);
      const RVector s = svd.singularValues();
      const double tail = dmax >= 2 ? 0.0 : s(1);
      CHECK(disc.front() == doctest::Approx(tail).epsilon(1e-10));
    }
  }
}

TEST_CASE("mps norm schemes agree") {
  Rng rng(4);
  CVector q(2);
  q << 0.6, Complex(0, 0.8);
  const MPS prod = product_mps({q, q, q, q, q});
  for (auto s : {NormScheme::kNaive, NormScheme::kParallel, NormScheme::kSequential})
    CHECK(mps_norm(prod, s) == doctest::Approx(1.0).epsilon(1e-14));

  const MPS big = random_mps(10, 2, 8, rng);
  const double naive = mps_norm(big, NormScheme::kNaive);
  CHECK(rel_diff(mps_norm(big, NormScheme::kParallel), naive) < 1e-10);
  CHECK(rel_diff(mps_norm(big, NormScheme::kSequential), naive) < 1e-10);
  CHECK(mps_norm(big, NormScheme::kParallel, nullptr, 3) == mps_norm(big, NormScheme::kParallel, nullptr, 1));

  MPS scaled = big;
  scaled.scale(Complex(0, 3));
  CHECK(std::pow(mps_norm(scaled, NormScheme::kSequential), 2) ==
        doctest::Approx(9 * std::pow(mps_norm(big, NormScheme::kSequential), 2)).epsilon(1e-12));

  for (int t = 0; t < 100; ++t) {
    const MPS m = random_mps(2 + t % 7, 2 + t % 2, 1 + t % 5, rng);
    const double a = mps_norm(m, NormScheme::kNaive);
    CHECK(rel_diff(mps_norm(m, NormScheme::kParallel), a) < 1e-10);
    CHECK(rel_diff(mps_norm(m, NormScheme::kSequential), a) < 1e-10);
  }
  const MPS other = random_mps(6, 2, 3, rng);
  const MPS m6 = random_mps(6, 2, 3, rng);
  CHECK(std::abs(mps_inner(m6, other) - contract(m6).flat().dot(contract(other).flat())) < 1e-10);
}

TEST_CASE("mps norm operation counts") {
  Rng rng(5);
  // Naive cost grows exponentially: doubling per added site at d = 2.
  std::vector<double> naive;
  for (int n = 6; n <= 12; n += 2) {
    ContractionStats st;
    mps_norm(random_mps(n, 2, 4, rng, false), NormScheme::kNaive, &st);
    naive.push_back(static_cast<double>(st.multiply_adds));
  }
  for (std::size_t i = 1; i < naive.size(); ++i) CHECK(naive[i] / naive[i - 1] > 3.5);

  for (int n : {4, 8, 16, 32}) {
    for (int bond : {2, 4, 8, 16}) {
      for (int d : {2, 3}) {
        ContractionStats st;
        mps_norm(random_mps(n, d, bond, rng, false), NormScheme::kSequential, &st);
        const double ratio = static_cast<double>(st.multiply_adds) / (n * d * std::pow(bond, 3));
        CHECK(ratio >= 0.25);
        CHECK(ratio <= 4.0);
      }
    }
  }
}

TEST_CASE("mps and graph serialization") {
  Rng rng(6);
  const MPS m = random_mps(5, 3, 4, rng);
  const MPS back = MPS::from_json(m.to_json());
  for (int j = 0; j < m.size(); ++j)
    for (int p = 0; p < 3; ++p) CHECK(back.sites[static_cast<std::size_t>(j)][static_cast<std::size_t>(p)] == m.sites[static_cast<std::size_t>(j)][static_cast<std::size_t>(p)]);
  CHECK_THROWS_AS(MPS::from_json("{\"sites\":[{\"shape\":[2,2,1],\"data\":[]}]}"), Error);

  const Graph g{4, {{0, 1}, {1, 2}, {2, 3}}};
  const Graph h = Graph::from_json(g.to_json());
  CHECK(h.vertices == 4);
  CHECK(h.edges == g.edges);
  CHECK_THROWS_AS(Graph::from_json("{\"vertices\":2,\"edges\":[[0,5]]}"), Error);
}

TEST_CASE("coloring counts") {
  CHECK(count_colorings(Graph{3, {{0, 1}, {1, 2}, {0, 2}}}, 3) == 6);
  CHECK(count_colorings(Graph{2, {{0, 1}}}, 2) == 2);
  for (int v = 0; v <= 6; ++v)
    for (int d = 1; d <= 4; ++d) CHECK(count_colorings(Graph{v, {}}, d) == static_cast<std::uint64_t>(std::pow(d, v)));
  CHECK(count_colorings(Graph{2, {{0, 0}, {0, 1}}}, 3) == 0);
  CHECK(count_colorings_brute_force(Graph{2, {{1, 1}}}, 3) == 0);
  // Petersen graph: chromatic polynomial at 3 is 120.
  Graph petersen{10, {}};
  for (int i = 0; i < 5; ++i) {
    petersen.edges.emplace_back(i, (i + 1) % 5);
    petersen.edges.emplace_back(i, i + 5);
    petersen.edges.emplace_back(i + 5, (i + 2) % 5 + 5);
  }
  CHECK(count_colorings(petersen, 3) == 120);
  CHECK(count_colorings_brute_force(petersen, 3) == 120);
  CHECK(count_colorings(petersen, 2) == 0);
}

TEST_CASE("graph classes and canonical codes") {
  const std::vector<std::size_t> known{1, 1, 2, 4, 11, 34, 156, 1044};
  for (int n = 0; n <= 7; ++n) CHECK(nonisomorphic_graphs(n).size() == known[static_cast<std::size_t>(n)]);

  Rng rng(7);
  for (int t = 0; t < 50; ++t) {
    Graph g{8, {}};
    for (int u = 0; u < 8; ++u)
      for (int v = u + 1; v < 8; ++v)
        if (rng.bernoulli(0.4)) g.edges.emplace_back(u, v);
    std::vector<int> perm(8);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = 7; i > 0; --i) std::swap(perm[static_cast<std::size_t>(i)], perm[rng.below(static_cast<std::uint64_t>(i) + 1)]);
    CHECK(canonical_code(g) == canonical_code(relabel(g, perm)));
  }
  CHECK(canonical_code(Graph{4, {{0, 1}, {2, 3}}}) != canonical_code(Graph{4, {{0, 1}, {1, 2}}}));
}

TEST_CASE("coloring contraction equals brute force on all graphs up to 7 vertices") {
  for (int n = 1; n <= 7; ++n)
    for (const auto& g : nonisomorphic_graphs(n))
      for (int d = 1; d <= 4; ++d) REQUIRE(count_colorings(g, d) == count_colorings_brute_force(g, d));
}

TEST_CASE("site embedding and projector structure") {
  for (int d = 2; d <= 4; ++d)
    for (double x : {0.0, 0.3, 0.77, 1.0}) CHECK(site_embedding(x, d).norm() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(site_embedding(0.0, 2)(0) == doctest::Approx(1.0));

  Rng rng(8);
  for (int n : {4, 5, 6}) {
    for (int stride : {1, 2, 3}) {
      const auto p = ProjectorMPS::random(n, 2, stride, 3, rng);
      const RMatrix dense = p.dense();
      CHECK(static_cast<std::uint64_t>(dense.rows()) == p.output_dimension());
      Eigen::FullPivLU<RMatrix> lu(dense);
      const auto kernel = static_cast<std::uint64_t>(dense.cols() - lu.rank());
      CHECK(kernel >= p.kernel_dimension_bound());
      if (stride >= 2) CHECK(kernel >= static_cast<std::uint64_t>(std::pow(2, n - n / stride)));
      CHECK(p.frobenius_norm() == doctest::Approx(dense.norm()).epsilon(1e-12));
      for (int t = 0; t < 5; ++t) {
        std::vector<double> x(static_cast<std::size_t>(n));
        for (auto& v : x) v = rng.uniform();
        const CVector phi = contract(embed_mps(x, 2)).flat();
        const double ref = (dense * phi.real()).norm();
        CHECK(std::abs(anomaly_score(p, x) - ref) < 1e-10 * std::max(1.0, ref));
      }
    }
  }
}

TEST_CASE("vectors in the projector kernel score zero") {
  Rng rng(9);
  const auto p = ProjectorMPS::random(6, 2, 2, 3, rng);
  const RMatrix dense = p.dense();
  Eigen::JacobiSVD<RMatrix> svd(dense, Eigen::ComputeFullV);
  const auto rank = svd.rank();
  REQUIRE(rank < dense.cols());
  for (Eigen::Index k = rank; k < std::min<Eigen::Index>(rank + 10, dense.cols()); ++k) {
    const CVector v = svd.matrixV().col(k).cast<Complex>();
    const MPS m = mps_from_tensor(DenseTensor::from_vector(v, 6));
    // The contraction forms D = ||Pv||², so round-off enters at the D level.
    CHECK(std::pow(projected_norm(p, m), 2) < 1e-15 * std::pow(svd.singularValues()(0), 2));
  }
  // A row-space vector keeps its full projected norm.
  const CVector w = svd.matrixV().col(0).cast<Complex>();
  CHECK(projected_norm(p, mps_from_tensor(DenseTensor::from_vector(w, 6))) ==
        doctest::Approx(svd.singularValues()(0)).epsilon(1e-10));
}

TEST_CASE("anomaly loss gradient matches finite differences") {
  Rng rng(10);
  auto p = ProjectorMPS::random(5, 2, 2, 2, rng);
  const auto train = cluster(4, 5, 0.2, 0.1, rng);
  for (double alpha : {0.0, 0.7}) {
    const auto g = anomaly_loss_gradient(p, train, alpha);
    for (int j = 0; j < p.sites(); ++j) {
      auto& core = p.cores[static_cast<std::size_t>(j)];
      for (std::size_t k = 0; k < core.size(); ++k) {
        for (Eigen::Index e = 0; e < core[k].size(); ++e) {
          const double h = 1e-6, orig = core[k](e);
          core[k](e) = orig + h;
          const double up = anomaly_loss(p, train, alpha);
          core[k](e) = orig - h;
          const double dn = anomaly_loss(p, train, alpha);
          core[k](e) = orig;
          CHECK(g[static_cast<std::size_t>(j)][k](e) == doctest::Approx((up - dn) / (2 * h)).epsilon(1e-5));
        }
      }
    }
  }
  // α = 0 drops the Frobenius term.
  CHECK(anomaly_loss(p, train, 0.0) == doctest::Approx(anomaly_loss(p, train, 1.0) - std::log(p.frobenius_norm())));
}

TEST_CASE("anomaly loss fixed point at sqrt(e)") {
  // Scanning a global scale of P for one sample: the loss vanishes where the
  // projected norm equals sqrt(e).
  Rng rng(11);
  auto p = ProjectorMPS::random(4, 2, 2, 2, rng);
  const std::vector<std::vector<double>> one{{0.1, 0.3, 0.2, 0.4}};
  const double s0 = anomaly_score(p, one[0]);
  double best_c = 0, best = 1e300;
  for (int i = 1; i <= 4000; ++i) {
    const double c = i * 1e-3 * kSqrtE / s0;
    ProjectorMPS q = p;
    for (auto& m : q.cores.front()) m *= c;
    const double l = anomaly_loss(q, one, 0.0);
    if (l < best) {
      best = l;
      best_c = c;
    }
  }
  CHECK(best_c * s0 == doctest::Approx(kSqrtE).epsilon(1e-3));

  AnomalyConfig cfg;
  cfg.alpha = 0;
  cfg.bond = 2;
  cfg.iterations = 500;
  const auto fit = anomaly_fit(one, cfg);
  CHECK(anomaly_score(fit.model, one[0]) == doctest::Approx(kSqrtE).epsilon(1e-4));
}

TEST_CASE("anomaly training separates a cluster from a far point") {
  Rng rng(5);
  const auto train = cluster(20, 6, 0.15, 0.05, rng);
  AnomalyConfig cfg;
  cfg.alpha = 0.5;
  cfg.bond = 2;
  cfg.iterations = 1000;
  const auto fit = anomaly_fit(train, cfg);
  REQUIRE(!fit.history.empty());
  for (std::size_t i = 1; i < fit.history.size(); ++i) CHECK(fit.history[i] <= fit.history[i - 1]);

  const auto test_in = cluster(20, 6, 0.15, 0.05, rng);
  const auto scores = anomaly_scores(fit.model, test_in, 2);
  for (double s : scores) CHECK(std::abs(s - kSqrtE) < 0.1 * kSqrtE);
  const double eps = 0.25 * kSqrtE;
  CHECK(anomaly_score(fit.model, std::vector<double>(6, 0.85)) < eps);
  CHECK(anomaly_score(fit.model, std::vector<double>(6, 0.15)) > eps);
}

TEST_CASE("anomaly scoring cost and locality") {
  Rng rng(12);
  const int bond = 6;
  for (int n : {6, 12, 24}) {
    const auto p = ProjectorMPS::random(n, 2, 2, bond, rng);
    for (int m : {5, 20}) {
      ContractionStats st;
      const auto xs = cluster(m, n, 0.5, 0.2, rng);
      const auto par = anomaly_scores(p, xs, 3, &st);
      const double ratio = static_cast<double>(st.multiply_adds) / (m * n * 2 * std::pow(bond, 3));
      CHECK(ratio >= 0.25);
      CHECK(ratio <= 4.0);
      const auto ser = anomaly_scores(p, xs, 1);
      CHECK(par == ser);
    }
  }

  // The score sees x only through φ(x), which has period 4.
  const auto p = ProjectorMPS::random(5, 2, 1, 3, rng);
  std::vector<double> x{0.1, 0.5, 0.9, 0.3, 0.7}, y = x;
  for (auto& v : y) v += 4;
  CHECK(anomaly_score(p, x) == doctest::Approx(anomaly_score(p, y)).epsilon(1e-12));

  // A bond-1 projector with identical site blocks is invariant under
  // permuting the sites.
  ProjectorMPS flat = ProjectorMPS::random(4, 2, 2, 1, rng);
  for (int j = 0; j < 4; ++j)
    flat.cores[static_cast<std::size_t>(j)] = flat.cores[static_cast<std::size_t>(j % 2)];
  const std::vector<double> a{0.1, 0.2, 0.6, 0.9}, b{0.6, 0.9, 0.1, 0.2};
  CHECK(anomaly_score(flat, a) == doctest::Approx(anomaly_score(flat, b)).epsilon(1e-12));
}

TEST_CASE("teleportation network") {
  Rng rng(13);
  for (int t = 0; t < 20; ++t) {
    const CVector psi = random_vector(2, rng).normalized();
    const auto branches = teleport_network(psi);
    double total = 0;
    for (const auto& b : branches) {
      CHECK(b.probability == doctest::Approx(0.25).epsilon(1e-12));
      CHECK(std::norm(psi.dot(b.bob)) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(test::phase_distance(b.bob, psi) < 1e-10);
      total += b.probability;
    }
    CHECK(total == doctest::Approx(1.0));
  }
}
