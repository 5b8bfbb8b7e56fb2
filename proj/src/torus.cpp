#include "nspd/torus.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "nspd/error.hpp"

namespace nspd {

namespace {

// FFTW's planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
using RealBuffer = std::unique_ptr<double, FftwFree>;
using ComplexBuffer = std::unique_ptr<fftw_complex, FftwFree>;

RealBuffer alloc_real(std::size_t n) { return RealBuffer(fftw_alloc_real(n)); }
ComplexBuffer alloc_complex(std::size_t n) { return ComplexBuffer(fftw_alloc_complex(n)); }

std::size_t ipow(std::size_t base, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

int signed_wavenumber(int index, int n) { return index < n / 2 ? index : index - n; }

}  // namespace

void Grid::validate() const {
  if (dim != 2 && dim != 3) throw ConfigError("grid.dim must be 2 or 3, got " + std::to_string(dim));
  if (n < 8 || (n & (n - 1)) != 0)
    throw ConfigError("grid.n must be a power of two >= 8, got " + std::to_string(n));
  if (!(dealias_fraction > 0.0 && dealias_fraction <= 1.0))
    throw ConfigError("grid.dealias_fraction must lie in (0, 1]");
}

// ---------------------------------------------------------------------------
// SpectralField

SpectralField::SpectralField(std::shared_ptr<const Torus> torus, int components)
    : torus_(std::move(torus)), components_(components), modes_(torus_->modes()),
      coeffs_(static_cast<std::size_t>(components) * modes_, Complex{0.0, 0.0}) {}

void SpectralField::set_zero() { std::fill(coeffs_.begin(), coeffs_.end(), Complex{0.0, 0.0}); }

bool SpectralField::all_finite() const {
  return std::all_of(coeffs_.begin(), coeffs_.end(),
                     [](const Complex& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

void SpectralField::add_conjugate_pair(int c, const Wavevector& k, Complex amplitude) {
  const int dim = torus_->dim();
  Wavevector neg{0, 0, 0};
  bool is_zero = true;
  for (int j = 0; j < dim; ++j) {
    neg[j] = -k[j];
    if (k[j] != 0) is_zero = false;
  }
  std::size_t idx = 0;
  bool conj = false;
  if (is_zero) {
    if (torus_->locate(k, idx, conj)) at(c, idx) += Complex{2.0 * amplitude.real(), 0.0};
    return;
  }
  if (torus_->locate(k, idx, conj)) at(c, idx) += conj ? std::conj(amplitude) : amplitude;
  // The negative partner is stored separately only on self-conjugate slices.
  std::size_t idx2 = 0;
  bool conj2 = false;
  if (torus_->locate(neg, idx2, conj2) && idx2 != idx)
    at(c, idx2) += conj2 ? amplitude : std::conj(amplitude);
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  if (o.coeffs_.size() != coeffs_.size()) throw ConfigError("SpectralField shape mismatch in +=");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
  if (o.coeffs_.size() != coeffs_.size()) throw ConfigError("SpectralField shape mismatch in -=");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(double s) {
  for (auto& z : coeffs_) z *= s;
  return *this;
}

SpectralField& SpectralField::axpy(double s, const SpectralField& o) {
  if (o.coeffs_.size() != coeffs_.size()) throw ConfigError("SpectralField shape mismatch in axpy");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += s * o.coeffs_[i];
  return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }

// ---------------------------------------------------------------------------
// Torus

struct Torus::Plans {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
  fftw_plan padded_forward = nullptr;
  fftw_plan padded_inverse = nullptr;
  ~Plans() {
    std::lock_guard lock(planner_mutex());
    for (auto* p : {forward, inverse, padded_forward, padded_inverse})
      if (p) fftw_destroy_plan(p);
  }
};

std::shared_ptr<const Torus> Torus::create(const Grid& grid) {
  grid.validate();
  return std::shared_ptr<const Torus>(new Torus(grid));
}

Torus::~Torus() = default;

Torus::Torus(const Grid& grid) : grid_(grid) {
  const int d = grid.dim;
  const int n = grid.n;
  const int half = n / 2 + 1;
  points_ = ipow(static_cast<std::size_t>(n), d);
  modes_ = ipow(static_cast<std::size_t>(n), d - 1) * static_cast<std::size_t>(half);
  volume_ = std::pow(2.0 * std::numbers::pi, d);

  if (grid.dealias_fraction >= 1.0) {
    padded_n_ = n;
  } else {
    padded_n_ = static_cast<int>(std::ceil(n / grid.dealias_fraction - 1e-9));
    if (padded_n_ % 2 != 0) ++padded_n_;
  }
  const int pn = padded_n_;
  const int phalf = pn / 2 + 1;
  padded_points_ = ipow(static_cast<std::size_t>(pn), d);
  padded_modes_ = ipow(static_cast<std::size_t>(pn), d - 1) * static_cast<std::size_t>(phalf);

  const double cutoff = std::floor(grid.dealias_fraction * n / 2.0 + 1e-9);

  k_.resize(modes_);
  k2_.resize(modes_);
  weight_.resize(modes_);
  retained_.resize(modes_);
  dk_.assign(modes_ * 3, 0.0);
  phase_.resize(modes_);
  to_padded_.assign(modes_, -1);

  for (std::size_t m = 0; m < modes_; ++m) {
    // Decompose m into per-axis indices, last axis fastest.
    std::size_t rest = m;
    std::array<int, 3> idx{0, 0, 0};
    idx[d - 1] = static_cast<int>(rest % half);
    rest /= half;
    for (int j = d - 2; j >= 0; --j) {
      idx[j] = static_cast<int>(rest % n);
      rest /= n;
    }
    Wavevector k{0, 0, 0};
    for (int j = 0; j < d - 1; ++j) k[j] = signed_wavenumber(idx[j], n);
    k[d - 1] = idx[d - 1];
    k_[m] = k;

    double k2 = 0.0;
    bool keep = true;
    int ksum = 0;
    for (int j = 0; j < d; ++j) {
      k2 += static_cast<double>(k[j]) * k[j];
      if (std::abs(k[j]) > cutoff) keep = false;
      dk_[m * 3 + j] = (std::abs(k[j]) == n / 2) ? 0.0 : static_cast<double>(k[j]);
      ksum += k[j];
    }
    k2_[m] = k2;
    retained_[m] = keep;
    if (keep) max_retained_k2_ = std::max(max_retained_k2_, k2);
    weight_[m] = (idx[d - 1] == 0 || idx[d - 1] == n / 2) ? 1.0 : 2.0;
    phase_[m] = (ksum % 2 == 0) ? 1.0 : -1.0;

    bool nyquist = false;
    for (int j = 0; j < d; ++j)
      if (std::abs(k[j]) == n / 2) nyquist = true;
    if (!nyquist || pn == n) {
      std::size_t pm = 0;
      for (int j = 0; j < d - 1; ++j) pm = pm * pn + static_cast<std::size_t>(k[j] < 0 ? k[j] + pn : k[j]);
      pm = pm * phalf + static_cast<std::size_t>(k[d - 1]);
      to_padded_[m] = static_cast<std::ptrdiff_t>(pm);
    }
  }

  std::size_t per_axis = (cutoff >= n / 2) ? static_cast<std::size_t>(n)
                                           : static_cast<std::size_t>(2 * cutoff + 1);
  retained_full_ = ipow(per_axis, d);

  plans_ = std::make_unique<Plans>();
  std::array<int, 3> dims{n, n, n};
  std::array<int, 3> pdims{pn, pn, pn};
  std::lock_guard lock(planner_mutex());
  {
    auto r = alloc_real(points_);
    auto c = alloc_complex(modes_);
    plans_->forward = fftw_plan_dft_r2c(d, dims.data(), r.get(), c.get(), FFTW_ESTIMATE);
    plans_->inverse = fftw_plan_dft_c2r(d, dims.data(), c.get(), r.get(), FFTW_ESTIMATE);
  }
  {
    auto r = alloc_real(padded_points_);
    auto c = alloc_complex(padded_modes_);
    plans_->padded_forward = fftw_plan_dft_r2c(d, pdims.data(), r.get(), c.get(), FFTW_ESTIMATE);
    plans_->padded_inverse = fftw_plan_dft_c2r(d, pdims.data(), c.get(), r.get(), FFTW_ESTIMATE);
  }
}

bool Torus::locate(const Wavevector& k, std::size_t& index, bool& conjugated) const {
  const int d = grid_.dim;
  const int n = grid_.n;
  const int half = n / 2 + 1;
  Wavevector kk = k;
  conjugated = false;
  // Canonical range per axis is [-n/2, n/2); the last axis stores [0, n/2].
  for (int j = 0; j < d; ++j)
    if (kk[j] < -n / 2 || kk[j] > n / 2) return false;
  if (kk[d - 1] < 0) {
    for (int j = 0; j < d; ++j) kk[j] = -kk[j];
    conjugated = true;
  }
  std::size_t m = 0;
  for (int j = 0; j < d - 1; ++j) {
    int kj = kk[j];
    if (kj == n / 2) kj = -n / 2;
    m = m * n + static_cast<std::size_t>(kj < 0 ? kj + n : kj);
  }
  m = m * half + static_cast<std::size_t>(kk[d - 1]);
  index = m;
  return true;
}

double Torus::coordinate(std::size_t p, int axis) const {
  const int d = grid_.dim;
  const std::size_t n = static_cast<std::size_t>(grid_.n);
  std::size_t stride = ipow(n, d - 1 - axis);
  std::size_t i = (p / stride) % n;
  return -std::numbers::pi + 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
}

double Torus::padded_coordinate(std::size_t p, int axis) const {
  const int d = grid_.dim;
  const std::size_t n = static_cast<std::size_t>(padded_n_);
  std::size_t stride = ipow(n, d - 1 - axis);
  std::size_t i = (p / stride) % n;
  return -std::numbers::pi + 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
}

SpectralField Torus::zeros(int components) const {
  return SpectralField(shared_from_this(), components);
}

void Torus::forward(std::span<const double> in, std::span<Complex> out, bool padded) const {
  const std::size_t np = padded ? padded_points_ : points_;
  const std::size_t nm = padded ? padded_modes_ : modes_;
  auto r = alloc_real(np);
  auto c = alloc_complex(nm);
  std::copy(in.begin(), in.end(), r.get());
  fftw_execute_dft_r2c(padded ? plans_->padded_forward : plans_->forward, r.get(), c.get());
  const double scale = 1.0 / static_cast<double>(np);
  if (!padded) {
    for (std::size_t m = 0; m < modes_; ++m)
      out[m] = Complex{c.get()[m][0], c.get()[m][1]} * (scale * phase_[m]);
    return;
  }
  for (std::size_t m = 0; m < modes_; ++m) {
    const auto pm = to_padded_[m];
    out[m] = pm < 0 ? Complex{0.0, 0.0}
                    : Complex{c.get()[pm][0], c.get()[pm][1]} * (scale * phase_[m]);
  }
}

void Torus::inverse(std::span<const Complex> in, std::span<double> out, bool padded) const {
  const std::size_t np = padded ? padded_points_ : points_;
  const std::size_t nm = padded ? padded_modes_ : modes_;
  auto r = alloc_real(np);
  auto c = alloc_complex(nm);
  if (!padded) {
    for (std::size_t m = 0; m < modes_; ++m) {
      const Complex z = in[m] * phase_[m];
      c.get()[m][0] = z.real();
      c.get()[m][1] = z.imag();
    }
  } else {
    std::fill_n(reinterpret_cast<double*>(c.get()), 2 * nm, 0.0);
    for (std::size_t m = 0; m < modes_; ++m) {
      const auto pm = to_padded_[m];
      if (pm < 0) continue;
      const Complex z = in[m] * phase_[m];
      c.get()[pm][0] = z.real();
      c.get()[pm][1] = z.imag();
    }
  }
  fftw_execute_dft_c2r(padded ? plans_->padded_inverse : plans_->inverse, c.get(), r.get());
  std::copy(r.get(), r.get() + np, out.begin());
}

SpectralField Torus::to_spectral(const PhysicalField& f) const {
  if (f.points != points_ || f.data.size() != static_cast<std::size_t>(f.components) * points_)
    throw ConfigError("to_spectral: sample count " + std::to_string(f.points) +
                      " does not match grid (" + std::to_string(points_) + " points)");
  SpectralField out = zeros(f.components);
  for (int c = 0; c < f.components; ++c) forward(f.component(c), out.component(c), false);
  return out;
}

PhysicalField Torus::to_physical(const SpectralField& f) const {
  if (f.modes() != modes_) throw ConfigError("to_physical: field belongs to a different grid");
  PhysicalField out(f.components(), points_);
  for (int c = 0; c < f.components(); ++c) inverse(f.component(c), out.component(c), false);
  return out;
}

PhysicalField Torus::to_physical_padded(const SpectralField& f) const {
  if (f.modes() != modes_) throw ConfigError("to_physical_padded: field belongs to a different grid");
  PhysicalField out(f.components(), padded_points_);
  for (int c = 0; c < f.components(); ++c) inverse(f.component(c), out.component(c), true);
  return out;
}

SpectralField Torus::from_physical_padded(const PhysicalField& f) const {
  if (f.points != padded_points_)
    throw ConfigError("from_physical_padded: sample count does not match padded grid");
  SpectralField out = zeros(f.components);
  for (int c = 0; c < f.components; ++c) forward(f.component(c), out.component(c), true);
  return out;
}

}  // namespace nspd
