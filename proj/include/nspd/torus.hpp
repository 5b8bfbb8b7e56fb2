#pragma once

// Fourier discretization of the periodic box [-pi, pi)^d.
//
// A field f is represented by coefficients f_k with
//     f(x) = sum_k f_k exp(i k.x),
// stored in the half-spectrum layout of a real-to-complex FFT: every axis
// except the last holds wavenumbers [-n/2, n/2), the last axis [0, n/2].
// Physical samples sit at x_j = -pi + 2 pi i_j / n, row-major with axis 0
// slowest.

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace nspd {

using Complex = std::complex<double>;

struct Grid {
  int dim = 2;
  int n = 64;
  double dealias_fraction = 2.0 / 3.0;

  /// Throws ConfigError unless dim in {2,3}, n >= 8 is a power of two and
  /// the dealias fraction lies in (0, 1].
  void validate() const;
  bool operator==(const Grid&) const = default;
};

using Wavevector = std::array<int, 3>;

class Torus;

/// Physical-space samples of a multi-component field on the native grid
/// (or on the padded product grid). Storage is component-major.
struct PhysicalField {
  int components = 0;
  std::size_t points = 0;
  std::vector<double> data;

  PhysicalField() = default;
  PhysicalField(int comps, std::size_t npoints)
      : components(comps), points(npoints), data(static_cast<std::size_t>(comps) * npoints, 0.0) {}

  std::span<double> component(int c) {
    return {data.data() + static_cast<std::size_t>(c) * points, points};
  }
  std::span<const double> component(int c) const {
    return {data.data() + static_cast<std::size_t>(c) * points, points};
  }
  double& at(int c, std::size_t p) { return data[static_cast<std::size_t>(c) * points + p]; }
  double at(int c, std::size_t p) const { return data[static_cast<std::size_t>(c) * points + p]; }
};

/// Fourier coefficients of a real multi-component field.
class SpectralField {
 public:
  SpectralField() = default;
  SpectralField(std::shared_ptr<const Torus> torus, int components);

  const std::shared_ptr<const Torus>& torus() const { return torus_; }
  int components() const { return components_; }
  std::size_t modes() const { return modes_; }

  std::span<Complex> component(int c) {
    return {coeffs_.data() + static_cast<std::size_t>(c) * modes_, modes_};
  }
  std::span<const Complex> component(int c) const {
    return {coeffs_.data() + static_cast<std::size_t>(c) * modes_, modes_};
  }
  Complex& at(int c, std::size_t m) { return coeffs_[static_cast<std::size_t>(c) * modes_ + m]; }
  const Complex& at(int c, std::size_t m) const {
    return coeffs_[static_cast<std::size_t>(c) * modes_ + m];
  }
  std::span<Complex> data() { return coeffs_; }
  std::span<const Complex> data() const { return coeffs_; }

  void set_zero();
  bool all_finite() const;

  /// Adds `amplitude * exp(i k.x) + conj(amplitude) * exp(-i k.x)` to
  /// component c. Both members of a conjugate pair stored in the half
  /// spectrum are updated. For k = 0 only the real part is added.
  void add_conjugate_pair(int c, const Wavevector& k, Complex amplitude);

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(double s);
  /// this += s * o
  SpectralField& axpy(double s, const SpectralField& o);

 private:
  std::shared_ptr<const Torus> torus_;
  int components_ = 0;
  std::size_t modes_ = 0;
  std::vector<Complex> coeffs_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);

/// Grid geometry, per-mode tables and FFT plans. Immutable after
/// construction and shared between fields; transforms are safe to call
/// concurrently.
class Torus : public std::enable_shared_from_this<Torus> {
 public:
  static std::shared_ptr<const Torus> create(const Grid& grid);
  ~Torus();
  Torus(const Torus&) = delete;
  Torus& operator=(const Torus&) = delete;

  const Grid& grid() const { return grid_; }
  int dim() const { return grid_.dim; }
  int n() const { return grid_.n; }
  std::size_t points() const { return points_; }
  std::size_t modes() const { return modes_; }
  /// Side length of the zero-padded grid used for products.
  int padded_n() const { return padded_n_; }
  std::size_t padded_points() const { return padded_points_; }
  /// (2 pi)^d
  double volume() const { return volume_; }

  const Wavevector& wavevector(std::size_t m) const { return k_[m]; }
  double k_squared(std::size_t m) const { return k2_[m]; }
  /// 1 for self-conjugate slices of the half spectrum, 2 otherwise.
  double weight(std::size_t m) const { return weight_[m]; }
  bool retained(std::size_t m) const { return retained_[m]; }
  /// Wavenumber used for differentiation along `axis` (0 on a Nyquist plane).
  double derivative_wavenumber(std::size_t m, int axis) const {
    return dk_[m * 3 + static_cast<std::size_t>(axis)];
  }
  /// Count of retained modes over the full (not half) lattice.
  std::size_t retained_lattice_modes() const { return retained_full_; }
  /// Largest |k|^2 among retained modes.
  double max_retained_k_squared() const { return max_retained_k2_; }

  /// Index of k in the half-spectrum table; `conjugated` is set when -k is
  /// the stored representative. Returns false if k is not representable.
  bool locate(const Wavevector& k, std::size_t& index, bool& conjugated) const;

  /// Physical coordinate of sample p along `axis`.
  double coordinate(std::size_t p, int axis) const;
  double padded_coordinate(std::size_t p, int axis) const;

  SpectralField zeros(int components) const;
  PhysicalField physical_zeros(int components) const { return PhysicalField(components, points_); }

  SpectralField to_spectral(const PhysicalField& f) const;
  PhysicalField to_physical(const SpectralField& f) const;

  /// Evaluate f on the padded grid (modes beyond the native Nyquist are zero).
  PhysicalField to_physical_padded(const SpectralField& f) const;
  /// Transform padded samples and keep the native modes below Nyquist.
  SpectralField from_physical_padded(const PhysicalField& f) const;

 private:
  explicit Torus(const Grid& grid);
  void forward(std::span<const double> in, std::span<Complex> out, bool padded) const;
  void inverse(std::span<const Complex> in, std::span<double> out, bool padded) const;

  Grid grid_;
  std::size_t points_ = 0;
  std::size_t modes_ = 0;
  int padded_n_ = 0;
  std::size_t padded_points_ = 0;
  std::size_t padded_modes_ = 0;
  double volume_ = 0.0;
  std::size_t retained_full_ = 0;
  double max_retained_k2_ = 0.0;

  std::vector<Wavevector> k_;
  std::vector<double> k2_;
  std::vector<double> weight_;
  std::vector<bool> retained_;
  std::vector<double> dk_;
  std::vector<double> phase_;         // (-1)^(k1+...+kd) for the -pi origin
  std::vector<std::ptrdiff_t> to_padded_;  // native mode -> padded mode, -1 if dropped

  struct Plans;
  std::unique_ptr<Plans> plans_;
};

}  // namespace nspd
