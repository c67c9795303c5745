#include "diqkd/photonics.hpp"

#include <cmath>

#include "doctest.h"
#include "test_util.hpp"

using namespace diqkd;

namespace {

// Diagonal photon-number populations of one mode, by direct index walk so
// it also works when the mode is the only subsystem left.
std::vector<double> number_populations(const DensityOperator& rho, const std::string& mode) {
  int pos = rho.index_of(mode);
  int d = rho.dim_of(mode);
  int below = 1;
  for (size_t i = pos + 1; i < rho.systems().size(); ++i) below *= rho.systems()[i].dim;
  std::vector<double> pops(d, 0.0);
  for (int i = 0; i < rho.dim(); ++i) pops[(i / below) % d] += rho.mat()(i, i).real();
  return pops;
}

}  // namespace

TEST_SUITE("photonics") {

TEST_CASE("binomial coefficients") {
  CHECK(binomial(0, 0) == 1);
  CHECK(binomial(5, 2) == 10);
  CHECK(binomial(6, 3) == 20);
  CHECK(binomial(4, 0) == 1);
  CHECK(binomial(4, 4) == 1);
}

TEST_CASE("mode register lookups") {
  ModeRegister reg{{"a.R", "a.L"}, 2};
  CHECK(reg.index_of("a.L") == 1);
  CHECK(reg.fock_dim() == 3);
  CHECK_THROWS_AS(reg.index_of("b.R"), std::invalid_argument);
}

TEST_CASE("sparse kets validate keys and accumulate amplitudes") {
  PhotonicState s(ModeRegister{{"a.R", "a.L"}, 1}, {"spin"});
  s.add({1, 0, 0}, 0.5);
  s.add({1, 0, 0}, 0.5);
  s.add({0, 1, 1}, Cplx(0, 1));
  CHECK(s.norm2() == doctest::Approx(2.0).epsilon(1e-14));
  CHECK_THROWS_AS(s.add({2, 0, 0}, 1.0), std::invalid_argument);  // over capacity
  CHECK_THROWS_AS(s.add({1, 0, 2}, 1.0), std::invalid_argument);  // spin digit not 0/1
  CHECK_THROWS_AS(s.add({1, 0}, 1.0), std::invalid_argument);     // short key
  CHECK(s.normalized().norm2() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("pair source amplitude ratios follow the squeezing expansion") {
  double p = 0.1;
  PhotonicState s = spdc_state({p, 2}, "A", "B");
  REQUIRE(s.reg().modes == std::vector<std::string>{"A.R", "A.L", "B.R", "B.L"});
  CHECK(s.norm2() == doctest::Approx(1.0).epsilon(1e-14));

  auto amp = [&](std::initializer_list<int> key) {
    auto it = s.amps().find(std::vector<int>(key));
    REQUIRE(it != s.amps().end());
    return it->second;
  };
  Cplx vac = amp({0, 0, 0, 0});
  // one pair: weight p split over two polarization terms
  CHECK(std::norm(amp({1, 0, 1, 0}) / vac) == doctest::Approx(p / 2).epsilon(1e-13));
  CHECK(std::norm(amp({0, 1, 0, 1}) / vac) == doctest::Approx(p / 2).epsilon(1e-13));
  // two pairs: weight p^2 split over three terms
  CHECK(std::norm(amp({2, 0, 2, 0}) / vac) == doctest::Approx(p * p / 3).epsilon(1e-13));
  CHECK(std::norm(amp({1, 1, 1, 1}) / vac) == doctest::Approx(p * p / 3).epsilon(1e-13));
  CHECK(std::norm(amp({0, 2, 0, 2}) / vac) == doctest::Approx(p * p / 3).epsilon(1e-13));
  // relative phases all positive in this gauge
  CHECK(amp({1, 0, 1, 0}).real() > 0);
  CHECK(amp({1, 1, 1, 1}).real() > 0);
}

TEST_CASE("pair source truncation and validation") {
  PhotonicState s1 = spdc_state({0.2, 1}, "A", "B");
  for (const auto& [key, a] : s1.amps()) {
    int total = key[0] + key[1];
    CHECK(total <= 1);
  }
  // vacuum weight 1/(1+p) at order 1
  auto vac = s1.amps().at({0, 0, 0, 0});
  CHECK(std::norm(vac) == doctest::Approx(1 / 1.2).epsilon(1e-13));

  CHECK_THROWS_AS(spdc_state({0.6, 2}, "A", "B"), std::invalid_argument);
  CHECK_THROWS_AS(spdc_state({-0.1, 2}, "A", "B"), std::invalid_argument);
  CHECK_THROWS_AS(spdc_state({0.1, 3}, "A", "B"), std::invalid_argument);
}

TEST_CASE("with_spins tensors balanced superpositions") {
  PhotonicState s = spdc_state({0.1, 1}, "A", "B");
  PhotonicState ws = with_spins(s, {"sA", "sB"});
  CHECK(ws.norm2() == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(ws.spins() == std::vector<std::string>{"sA", "sB"});
  // each photonic amplitude splits evenly over 4 spin digits
  Cplx vac_up_up = ws.amps().at({0, 0, 0, 0, 0, 0});
  Cplx vac_dn_dn = ws.amps().at({0, 0, 0, 0, 1, 1});
  CHECK(std::abs(vac_up_up - vac_dn_dn) < 1e-14);
  CHECK(std::norm(vac_up_up) == doctest::Approx(1 / 1.1 / 4).epsilon(1e-13));
}

TEST_CASE("densify produces a pure state with modes before spins") {
  PhotonicState ws = with_spins(spdc_state({0.1, 1}, "A", "B"), {"sA"});
  DensityOperator rho = densify(ws);
  REQUIRE(rho.systems().size() == 5);
  CHECK(rho.systems()[0].label == "A.R");
  CHECK(rho.systems()[3].dim == 2);  // B.L at capacity 1
  CHECK(rho.systems()[4].label == "sA");
  CHECK(rho.trace_real() == doctest::Approx(1.0).epsilon(1e-13));
  CHECK((rho.mat() * rho.mat() - rho.mat()).norm() < 1e-12);
}

TEST_CASE("loss Kraus sets resolve the identity") {
  for (double eta : {0.0, 0.37, 1.0}) {
    auto ks = loss_kraus_set(4, eta);
    REQUIRE(ks.size() == 4);
    Mat sum = Mat::Zero(4, 4);
    for (const auto& k : ks) sum += k.adjoint() * k;
    CHECK((sum - Mat::Identity(4, 4)).norm() < 1e-13);
  }
  CHECK_THROWS_AS(loss_kraus_set(4, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(loss_kraus_set(0, 0.5), std::invalid_argument);
}

TEST_CASE("loss channel thins photon numbers binomially") {
  // two photons in A.R
  PhotonicState s(ModeRegister{{"A.R", "A.L"}, 2});
  s.add({2, 0}, 1.0);
  DensityOperator rho = densify(s);
  double eta = 0.855;
  DensityOperator lossy = loss_channel(rho, {"A.R"}, eta);
  CHECK(lossy.trace_real() == doctest::Approx(1.0).epsilon(1e-13));
  auto pops = number_populations(lossy, "A.R");
  CHECK(pops[2] == doctest::Approx(eta * eta).epsilon(1e-13));
  CHECK(pops[1] == doctest::Approx(2 * eta * (1 - eta)).epsilon(1e-13));
  CHECK(pops[0] == doctest::Approx((1 - eta) * (1 - eta)).epsilon(1e-13));

  DensityOperator dark = loss_channel(rho, {"A.R"}, 0.0);
  auto dark_pops = number_populations(dark, "A.R");
  CHECK(dark_pops[0] == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("pair basis matrix is unitary on complete photon-number blocks") {
  Eigen::Matrix2cd v;
  double c = std::cos(0.4), s = std::sin(0.4);
  v << c, Cplx(0, 1) * s, Cplx(0, 1) * s, c;  // unitary
  int d = 3;
  Mat b = pair_basis_matrix(v, d);
  REQUIRE(b.rows() == d * d);
  // restrict to keys with n1+n2 <= d-1, where the change of basis is exact
  std::vector<int> idx;
  for (int n1 = 0; n1 < d; ++n1)
    for (int n2 = 0; n2 < d; ++n2)
      if (n1 + n2 <= d - 1) idx.push_back(n1 * d + n2);
  Mat g = Mat::Zero(idx.size(), idx.size());
  Mat bb = b.adjoint() * b;
  for (size_t i = 0; i < idx.size(); ++i)
    for (size_t j = 0; j < idx.size(); ++j) g(i, j) = bb(idx[i], idx[j]);
  CHECK((g - Mat::Identity(idx.size(), idx.size())).norm() < 1e-12);

  Eigen::Matrix2cd bad;
  bad << 1, 1, 0, 1;
  CHECK_THROWS_AS(pair_basis_matrix(bad, 3), std::invalid_argument);
}

TEST_CASE("circular to linear rewrite sends (R+L) to a pure H photon") {
  PhotonicState s(ModeRegister{{"A.R", "A.L"}, 2});
  s.add({1, 0}, 1 / std::sqrt(2.0));
  s.add({0, 1}, 1 / std::sqrt(2.0));
  DensityOperator lin = to_linear_basis(densify(s), "A");
  REQUIRE(lin.has("A.H"));
  REQUIRE(lin.has("A.V"));
  auto h_pops = number_populations(lin, "A.H");
  auto v_pops = number_populations(lin, "A.V");
  CHECK(h_pops[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(v_pops[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("circular photon splits evenly between linear ports") {
  PhotonicState s(ModeRegister{{"A.R", "A.L"}, 1});
  s.add({1, 0}, 1.0);
  DensityOperator lin = to_linear_basis(densify(s), "A");
  auto h_pops = number_populations(lin, "A.H");
  CHECK(h_pops[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(lin.trace_real() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("linear rewrite rejects support past the exact truncation") {
  PhotonicState s(ModeRegister{{"A.R", "A.L"}, 2});
  s.add({2, 1}, 1.0);  // 3 photons total, capacity 2 per mode
  CHECK_THROWS_AS(to_linear_basis(densify(s), "A"), std::invalid_argument);
}

TEST_CASE("threshold detector on one and two photons") {
  double eta = 0.855;
  PhotonicState one(ModeRegister{{"m", "aux"}, 2});
  one.add({1, 0}, 1.0);
  DetectResult r1 = threshold_detect(densify(one), "m", eta);
  CHECK(r1.p_click == doctest::Approx(eta).epsilon(1e-13));
  CHECK(r1.p_click + r1.p_noclick == doctest::Approx(1.0).epsilon(1e-13));

  PhotonicState two(ModeRegister{{"m", "aux"}, 2});
  two.add({2, 0}, 1.0);
  DetectResult r2 = threshold_detect(densify(two), "m", eta);
  CHECK(r2.p_click == doctest::Approx(0.978975).epsilon(1e-13));  // 1 - (1-0.855)^2
  CHECK(!r2.click.has("m"));
  CHECK(r2.click.trace_real() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r2.noclick.trace_real() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("threshold detector splits a vacuum and one-photon mixture") {
  PhotonicState s(ModeRegister{{"m", "aux"}, 1});
  s.add({0, 0}, std::sqrt(0.75));
  s.add({1, 1}, std::sqrt(0.25));
  double eta = 0.9;
  DetectResult r = threshold_detect(densify(s), "m", eta);
  CHECK(r.p_click == doctest::Approx(0.25 * eta).epsilon(1e-13));
  // clicking projects onto the photon component, which carries the aux photon
  auto aux = number_populations(r.click, "aux");
  CHECK(aux[1] == doctest::Approx(1.0).epsilon(1e-12));
  auto aux_nc = number_populations(r.noclick, "aux");
  CHECK(aux_nc[0] == doctest::Approx(0.75 / (0.75 + 0.25 * 0.1)).epsilon(1e-12));
}

TEST_CASE("detector efficiency bounds are enforced") {
  PhotonicState s(ModeRegister{{"m"}, 1});
  s.add({0}, 1.0);
  CHECK_THROWS_AS(threshold_detect(densify(s), "m", -0.1), std::invalid_argument);
  CHECK_THROWS_AS(threshold_detect(densify(s), "m", 1.1), std::invalid_argument);
}

}  // TEST_SUITE
