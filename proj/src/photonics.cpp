#include "diqkd/photonics.hpp"

#include <cmath>
#include <stdexcept>

namespace diqkd {

int ModeRegister::index_of(const std::string& mode) const {
  for (size_t i = 0; i < modes.size(); ++i)
    if (modes[i] == mode) return static_cast<int>(i);
  throw std::invalid_argument("unknown mode '" + mode + "'");
}

PhotonicState::PhotonicState(ModeRegister reg, std::vector<std::string> spins)
    : reg_(std::move(reg)), spins_(std::move(spins)) {}

void PhotonicState::check_key(const std::vector<int>& key) const {
  if (key.size() != reg_.modes.size() + spins_.size())
    throw std::invalid_argument("key length does not match mode/spin count");
  for (size_t i = 0; i < reg_.modes.size(); ++i)
    if (key[i] < 0 || key[i] > reg_.capacity)
      throw std::invalid_argument("occupation outside truncation on mode '" + reg_.modes[i] + "'");
  for (size_t i = reg_.modes.size(); i < key.size(); ++i)
    if (key[i] != 0 && key[i] != 1) throw std::invalid_argument("spin digit must be 0 or 1");
}

void PhotonicState::add(const std::vector<int>& key, Cplx amp) {
  check_key(key);
  amps_[key] += amp;
}

double PhotonicState::norm2() const {
  double s = 0;
  for (const auto& [key, amp] : amps_) s += std::norm(amp);
  return s;
}

PhotonicState PhotonicState::normalized() const {
  double n = std::sqrt(norm2());
  if (n < 1e-150) throw std::runtime_error("cannot normalize zero state");
  PhotonicState out = *this;
  for (auto& [key, amp] : out.amps_) amp /= n;
  return out;
}

PhotonicState spdc_state(const SourceParams& src, const std::string& a, const std::string& b) {
  if (!(src.p >= 0 && src.p <= 0.5))
    throw std::invalid_argument("source p must lie in [0, 0.5]");
  if (src.order != 1 && src.order != 2)
    throw std::invalid_argument("source order must be 1 or 2");

  ModeRegister reg{{a + ".R", a + ".L", b + ".R", b + ".L"}, src.order};
  PhotonicState psi(reg);
  const double s2 = 1.0 / std::sqrt(2.0);
  const double s3 = 1.0 / std::sqrt(3.0);
  const double rp = std::sqrt(src.p);

  psi.add({0, 0, 0, 0}, 1.0);
  psi.add({1, 0, 1, 0}, rp * s2);
  psi.add({0, 1, 0, 1}, rp * s2);
  if (src.order == 2) {
    psi.add({2, 0, 2, 0}, src.p * s3);
    psi.add({1, 1, 1, 1}, src.p * s3);
    psi.add({0, 2, 0, 2}, src.p * s3);
  }
  return psi.normalized();
}

PhotonicState with_spins(const PhotonicState& state, const std::vector<std::string>& spins) {
  std::vector<std::string> all = state.spins();
  all.insert(all.end(), spins.begin(), spins.end());
  PhotonicState out(state.reg(), all);
  const double amp = std::pow(0.5, spins.size() / 2.0);
  const size_t extra = spins.size();
  for (const auto& [key, a] : state.amps()) {
    std::vector<int> k = key;
    k.resize(key.size() + extra, 0);
    for (int bits = 0; bits < (1 << extra); ++bits) {
      for (size_t i = 0; i < extra; ++i) k[key.size() + i] = (bits >> i) & 1;
      out.add(k, a * amp);
    }
  }
  return out;
}

DensityOperator densify(const PhotonicState& state) {
  std::vector<Subsystem> systems;
  for (const auto& mode : state.reg().modes) systems.push_back({mode, state.reg().fock_dim()});
  for (const auto& spin : state.spins()) systems.push_back({spin, 2});

  const int dim = total_dim(systems);
  Vec psi = Vec::Zero(dim);
  for (const auto& [key, amp] : state.amps()) {
    int idx = 0;
    for (size_t i = 0; i < key.size(); ++i) idx = idx * systems[i].dim + key[i];
    psi(idx) += amp;
  }
  return DensityOperator::from_pure(std::move(systems), psi);
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  double r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

std::vector<Mat> loss_kraus_set(int d, double eta) {
  if (d < 1) throw std::invalid_argument("loss Kraus set needs Fock dim >= 1");
  if (!(eta >= 0 && eta <= 1)) throw std::invalid_argument("loss eta must lie in [0, 1]");
  std::vector<Mat> kraus;
  for (int k = 0; k < d; ++k) {
    Mat m = Mat::Zero(d, d);
    for (int n = k; n < d; ++n)
      m(n - k, n) = std::sqrt(binomial(n, k) * std::pow(eta, n - k) * std::pow(1 - eta, k));
    kraus.push_back(std::move(m));
  }
  return kraus;
}

DensityOperator loss_channel(const DensityOperator& rho, const std::vector<std::string>& modes,
                             double eta) {
  DensityOperator out = rho;
  for (const auto& mode : modes) {
    auto kraus = loss_kraus_set(out.dim_of(mode), eta);
    out = apply_kraus(out, {mode}, kraus);
  }
  return out;
}

Mat pair_basis_matrix(const Eigen::Matrix2cd& v, int d) {
  if ((v * v.adjoint() - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("pair basis change requires a unitary 2x2 matrix");

  // a_m^dag = sum_i conj(v(i,m)) c_i^dag
  const Cplx a1 = std::conj(v(0, 0)), a2 = std::conj(v(1, 0));
  const Cplx b1 = std::conj(v(0, 1)), b2 = std::conj(v(1, 1));

  std::vector<double> fact(2 * d - 1);
  fact[0] = 1;
  for (size_t i = 1; i < fact.size(); ++i) fact[i] = fact[i - 1] * i;

  auto ipow = [](Cplx z, int e) {
    Cplx r = 1.0;
    for (int i = 0; i < e; ++i) r *= z;
    return r;
  };

  Mat out = Mat::Zero(d * d, d * d);
  for (int n1 = 0; n1 < d; ++n1)
    for (int n2 = 0; n2 < d; ++n2)
      for (int m1 = 0; m1 < d; ++m1) {
        int m2 = n1 + n2 - m1;
        if (m2 < 0 || m2 >= d) continue;
        Cplx amp = 0;
        for (int j = std::max(0, m1 - n2); j <= std::min(n1, m1); ++j) {
          int k = m1 - j;
          amp += binomial(n1, j) * binomial(n2, k) * ipow(a1, j) * ipow(a2, n1 - j) *
                 ipow(b1, k) * ipow(b2, n2 - k);
        }
        amp *= std::sqrt(fact[m1] * fact[m2] / (fact[n1] * fact[n2]));
        out(m1 * d + m2, n1 * d + n2) = amp;
      }
  return out;
}

DensityOperator to_linear_basis(const DensityOperator& rho, const std::string& location) {
  const std::string r = location + ".R", l = location + ".L";
  const int d = rho.dim_of(r);
  if (rho.dim_of(l) != d)
    throw std::invalid_argument("basis change requires equal dims on both modes");

  // Support beyond total d-1 photons would be mangled by the truncation.
  DensityOperator pair = partial_trace(rho, {r, l});
  double overflow = 0;
  for (int n1 = 0; n1 < d; ++n1)
    for (int n2 = 0; n2 < d; ++n2)
      if (n1 + n2 > d - 1) overflow += std::abs(pair.mat()(n1 * d + n2, n1 * d + n2));
  if (overflow > 1e-9 * std::max(1.0, rho.trace_real()))
    throw std::invalid_argument("basis change on '" + location +
                                "' has photon-number support beyond the exact truncation");

  const double s2 = 1.0 / std::sqrt(2.0);
  Eigen::Matrix2cd v;
  v << s2, s2, Cplx(0, -s2), Cplx(0, s2);
  DensityOperator out = apply_unitary(rho, {r, l}, pair_basis_matrix(v, d));
  out.rename(r, location + ".H");
  out.rename(l, location + ".V");
  return out;
}

DetectResult threshold_detect(const DensityOperator& rho, const std::string& mode, double eta) {
  if (!(eta >= 0 && eta <= 1)) throw std::invalid_argument("detector eta must lie in [0, 1]");
  const int d = rho.dim_of(mode);
  std::vector<double> w_click(d), w_noclick(d);
  for (int n = 0; n < d; ++n) {
    w_noclick[n] = std::pow(1 - eta, n);
    w_click[n] = 1 - w_noclick[n];
  }

  const double tr = rho.trace_real();
  DetectResult res;
  DensityOperator click = weighted_block_trace(rho, mode, w_click);
  DensityOperator noclick = weighted_block_trace(rho, mode, w_noclick);
  res.p_click = click.trace_real() / tr;
  res.p_noclick = noclick.trace_real() / tr;
  if (res.p_click > 1e-300) res.click = click.normalized();
  if (res.p_noclick > 1e-300) res.noclick = noclick.normalized();
  return res;
}

}  // namespace diqkd
