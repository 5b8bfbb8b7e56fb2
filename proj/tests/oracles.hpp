#pragma once

// Test-only reference computations. They share the FFT with the library but
// none of its product, projection or derivative code: derivatives use the
// raw wavevector, products are formed on a grid fine enough that nothing
// aliases, and the projection is coded per mode from its definition.

#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <vector>

#include "nspd/torus.hpp"

namespace oracle {

using nspd::Complex;
using nspd::PhysicalField;
using nspd::SpectralField;
using nspd::Torus;
using nspd::Wavevector;
using TorusPtr = std::shared_ptr<const Torus>;

inline int cutoff(const Torus& t) {
  return static_cast<int>(std::floor(t.grid().dealias_fraction * t.n() / 2.0 + 1e-12));
}

inline bool inside(const Wavevector& k, int dim, int kc) {
  for (int j = 0; j < dim; ++j)
    if (std::abs(k[j]) > kc) return false;
  return true;
}

/// f(x) by direct summation of its Fourier series.
inline double eval_direct(const SpectralField& f, int c, const std::array<double, 3>& x) {
  const Torus& t = *f.torus();
  double s = 0.0;
  for (std::size_t m = 0; m < t.modes(); ++m) {
    const Wavevector& k = t.wavevector(m);
    double phase = 0.0;
    for (int j = 0; j < t.dim(); ++j) phase += k[j] * x[j];
    s += t.weight(m) * std::real(f.at(c, m) * std::polar(1.0, phase));
  }
  return s;
}

/// Copy coefficients of f onto a finer torus; `axis` >= 0 multiplies by i k_axis.
inline SpectralField embed(const SpectralField& f, const TorusPtr& fine, int axis = -1) {
  const Torus& t = *f.torus();
  SpectralField out = fine->zeros(f.components());
  for (std::size_t m = 0; m < t.modes(); ++m) {
    const Wavevector& k = t.wavevector(m);
    bool nyquist = false;
    for (int j = 0; j < t.dim(); ++j) nyquist = nyquist || std::abs(k[j]) == t.n() / 2;
    std::size_t idx;
    bool conj;
    if (nyquist || !fine->locate(k, idx, conj)) continue;  // band-limited inputs only
    for (int c = 0; c < f.components(); ++c) {
      Complex v = f.at(c, m);
      if (axis >= 0) v *= Complex(0.0, static_cast<double>(k[axis]));
      out.at(c, idx) = conj ? std::conj(v) : v;
    }
  }
  return out;
}

/// Samples of f (or of d_axis f) on the fine grid.
inline PhysicalField fine_samples(const SpectralField& f, const TorusPtr& fine, int axis = -1) {
  return fine->to_physical(embed(f, fine, axis));
}

/// Modes of F (on the fine torus) inside the cutoff box of `coarse`.
inline SpectralField restrict_to(const SpectralField& F, const TorusPtr& coarse) {
  const int kc = cutoff(*coarse);
  SpectralField out = coarse->zeros(F.components());
  const Torus& fine = *F.torus();
  for (std::size_t m = 0; m < coarse->modes(); ++m) {
    const Wavevector& k = coarse->wavevector(m);
    if (!inside(k, coarse->dim(), kc)) continue;
    std::size_t idx;
    bool conj;
    if (!fine.locate(k, idx, conj)) continue;
    for (int c = 0; c < F.components(); ++c) out.at(c, m) = conj ? std::conj(F.at(c, idx)) : F.at(c, idx);
  }
  return out;
}

/// a - (a.k) k / |k|^2 per mode, zero mean.
inline SpectralField project(const SpectralField& u) {
  const Torus& t = *u.torus();
  const int dim = t.dim();
  SpectralField out = u;
  for (std::size_t m = 0; m < t.modes(); ++m) {
    const Wavevector& k = t.wavevector(m);
    double k2 = 0.0;
    for (int j = 0; j < dim; ++j) k2 += double(k[j]) * k[j];
    if (k2 == 0.0) {
      for (int c = 0; c < dim; ++c) out.at(c, m) = 0.0;
      continue;
    }
    Complex ak = 0.0;
    for (int j = 0; j < dim; ++j) ak += u.at(j, m) * double(k[j]);
    for (int c = 0; c < dim; ++c) out.at(c, m) = u.at(c, m) - ak * double(k[c]) / k2;
  }
  return out;
}

/// A grid `factor` times finer than the coarse one, with sampling and
/// restriction helpers. Factor 2 already keeps cubic products of
/// band-limited fields free of aliasing inside the retained band.
struct FineOp {
  TorusPtr coarse, fine;
  explicit FineOp(const TorusPtr& c, int factor = 4) : coarse(c) {
    nspd::Grid g = c->grid();
    g.n *= factor;
    fine = Torus::create(g);
  }
  PhysicalField values(const SpectralField& f) const { return fine_samples(f, fine); }
  std::vector<PhysicalField> grads(const SpectralField& f) const {
    std::vector<PhysicalField> g;
    for (int j = 0; j < coarse->dim(); ++j) g.push_back(fine_samples(f, fine, j));
    return g;
  }
  SpectralField back(const PhysicalField& p) const { return restrict_to(fine->to_spectral(p), coarse); }
};

/// (u.grad) v, projected.
inline SpectralField convective(const SpectralField& u, const SpectralField& v, int factor = 4) {
  FineOp op(u.torus(), factor);
  const int dim = op.coarse->dim();
  const PhysicalField up = op.values(u);
  const auto gv = op.grads(v);
  PhysicalField out(dim, op.fine->points());
  for (std::size_t p = 0; p < out.points; ++p)
    for (int i = 0; i < dim; ++i) {
      double s = 0.0;
      for (int j = 0; j < dim; ++j) s += up.at(j, p) * gv[j].at(i, p);
      out.at(i, p) = s;
    }
  return project(op.back(out));
}

/// (v.grad) d.
inline SpectralField transport(const SpectralField& v, const SpectralField& d, int factor = 4) {
  FineOp op(v.torus(), factor);
  const int dim = op.coarse->dim();
  const PhysicalField vp = op.values(v);
  const auto gd = op.grads(d);
  PhysicalField out(d.components(), op.fine->points());
  for (std::size_t p = 0; p < out.points; ++p)
    for (int i = 0; i < d.components(); ++i) {
      double s = 0.0;
      for (int j = 0; j < dim; ++j) s += vp.at(j, p) * gd[j].at(i, p);
      out.at(i, p) = s;
    }
  return op.back(out);
}

/// -Pi div(grad d (.) grad m); the divergence of the restricted tensor is
/// taken with i k per mode.
inline SpectralField stress(const SpectralField& d, const SpectralField& m, int factor = 4) {
  FineOp op(d.torus(), factor);
  const int dim = op.coarse->dim();
  const auto gd = op.grads(d);
  const auto gm = op.grads(m);
  PhysicalField tensor(dim * dim, op.fine->points());
  for (std::size_t p = 0; p < tensor.points; ++p)
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += gd[i].at(k, p) * gm[j].at(k, p);
        tensor.at(i * dim + j, p) = s;
      }
  // divergence on the fine grid, then restrict
  SpectralField T = op.fine->to_spectral(tensor);
  SpectralField div = op.fine->zeros(dim);
  for (std::size_t q = 0; q < op.fine->modes(); ++q) {
    const Wavevector& k = op.fine->wavevector(q);
    for (int i = 0; i < dim; ++i) {
      Complex s = 0.0;
      for (int j = 0; j < dim; ++j) s += Complex(0.0, double(k[j])) * T.at(i * dim + j, q);
      div.at(i, q) = -s;
    }
  }
  return project(restrict_to(div, op.coarse));
}

/// |grad d|^2 d.
inline SpectralField ginzburg(const SpectralField& d, int factor = 4) {
  FineOp op(d.torus(), factor);
  const int dim = op.coarse->dim();
  const PhysicalField dp = op.values(d);
  const auto gd = op.grads(d);
  PhysicalField out(3, op.fine->points());
  for (std::size_t p = 0; p < out.points; ++p) {
    double g2 = 0.0;
    for (int j = 0; j < dim; ++j)
      for (int k = 0; k < 3; ++k) g2 += gd[j].at(k, p) * gd[j].at(k, p);
    for (int k = 0; k < 3; ++k) out.at(k, p) = g2 * dp.at(k, p);
  }
  return op.back(out);
}

/// Field from a function of position sampled on the native grid.
inline SpectralField from_function(const TorusPtr& t, int comps,
                                   const std::function<double(int, const std::array<double, 3>&)>& f) {
  PhysicalField p = t->physical_zeros(comps);
  for (std::size_t q = 0; q < p.points; ++q) {
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int j = 0; j < t->dim(); ++j) x[j] = t->coordinate(q, j);
    for (int c = 0; c < comps; ++c) p.at(c, q) = f(c, x);
  }
  return t->to_spectral(p);
}

/// max |a - b| over coefficients, relative to max |b| (or absolute if b = 0).
inline double rel_diff(const SpectralField& a, const SpectralField& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    num = std::max(num, std::abs(a.data()[i] - b.data()[i]));
    den = std::max(den, std::abs(b.data()[i]));
  }
  return den > 0.0 ? num / den : num;
}

}  // namespace oracle
