#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "fracdiff/summation.hpp"

namespace fracdiff {

/// Periodic box in d in {1, 2} dimensions, centered at the origin.
/// Node j on each axis sits at -L/2 + j*spacing; the dual lattice is
/// k_m = 2*pi*m/L with m in [-N/2, N/2).
template <typename Scalar>
struct SpatialGrid {
    int dim = 1;
    int points_per_axis = 0;
    Scalar length = Scalar(0);

    SpatialGrid(int dim_, int points_per_axis_, Scalar length_)
        : dim(dim_), points_per_axis(points_per_axis_), length(length_) {
        if (dim != 1 && dim != 2) throw std::invalid_argument("SpatialGrid: dim must be 1 or 2");
        if (points_per_axis < 8 || (points_per_axis & (points_per_axis - 1)) != 0)
            throw std::invalid_argument("SpatialGrid: points_per_axis must be a power of two >= 8");
        if (!(length > Scalar(0))) throw std::invalid_argument("SpatialGrid: length must be > 0");
    }

    Scalar spacing() const { return length / Scalar(points_per_axis); }
    Eigen::Index node_count() const {
        Eigen::Index n = points_per_axis;
        return dim == 1 ? n : n * n;
    }
    Scalar coordinate(int j) const { return -length / Scalar(2) + Scalar(j) * spacing(); }

    /// Signed frequency index of FFT-ordered slot p: p for p < N/2, p - N above.
    int freq_index(int p) const { return p < points_per_axis / 2 ? p : p - points_per_axis; }
    Scalar wavenumber(int p) const {
        return Scalar(2) * std::numbers::pi_v<Scalar> * Scalar(freq_index(p)) / length;
    }

    /// Per-axis node indices of a flat (axis-0 major) index.
    Eigen::Array2i unflatten(Eigen::Index flat) const {
        if (dim == 1) return {static_cast<int>(flat), 0};
        return {static_cast<int>(flat / points_per_axis), static_cast<int>(flat % points_per_axis)};
    }

    bool operator==(const SpatialGrid& o) const {
        return dim == o.dim && points_per_axis == o.points_per_axis && length == o.length;
    }
};

/// Sampled (generally complex-valued, signed) density on a SpatialGrid.
template <typename Scalar>
struct DensityField {
    using Complex = std::complex<Scalar>;
    SpatialGrid<Scalar> grid;
    Eigen::Vector<Complex, Eigen::Dynamic> values;

    DensityField(const SpatialGrid<Scalar>& g, Eigen::Vector<Complex, Eigen::Dynamic> v)
        : grid(g), values(std::move(v)) {
        if (values.size() != grid.node_count())
            throw std::invalid_argument("DensityField: value count does not match grid");
    }
    static DensityField zero(const SpatialGrid<Scalar>& g) {
        return DensityField(g, Eigen::Vector<Complex, Eigen::Dynamic>::Zero(g.node_count()));
    }
};

/// Discrete Fourier modes of a DensityField, FFT-ordered per axis.
template <typename Scalar>
struct SpectralField {
    using Complex = std::complex<Scalar>;
    SpatialGrid<Scalar> grid;
    Eigen::Vector<Complex, Eigen::Dynamic> modes;

    SpectralField(const SpatialGrid<Scalar>& g, Eigen::Vector<Complex, Eigen::Dynamic> m)
        : grid(g), modes(std::move(m)) {
        if (modes.size() != grid.node_count())
            throw std::invalid_argument("SpectralField: mode count does not match grid");
    }

    /// Wavenumber vector (padded with 0 for unused axes) of a flat mode index.
    Eigen::Vector2<Scalar> wavevector(Eigen::Index flat) const {
        const auto idx = grid.unflatten(flat);
        Eigen::Vector2<Scalar> k{grid.wavenumber(idx[0]), Scalar(0)};
        if (grid.dim == 2) k[1] = grid.wavenumber(idx[1]);
        return k;
    }
    Scalar k_squared(Eigen::Index flat) const { return wavevector(flat).squaredNorm(); }
};

/// Box integral spacing^d * sum(values), compensated, ascending index order.
template <typename Scalar>
std::complex<Scalar> quadrature(const DensityField<Scalar>& field) {
    const Scalar h = field.grid.spacing();
    Scalar cell = h;
    if (field.grid.dim == 2) cell *= h;
    return cell * kahan_sum(field.values);
}

namespace detail {

// In-place 1D FFT along each axis of the flattened (axis-0 major) data.
template <typename Scalar>
void fft_all_axes(const SpatialGrid<Scalar>& grid,
                  Eigen::Vector<std::complex<Scalar>, Eigen::Dynamic>& data, bool forward) {
    using Complex = std::complex<Scalar>;
    using VecC = Eigen::Vector<Complex, Eigen::Dynamic>;
    Eigen::FFT<Scalar> fft;
    const int n = grid.points_per_axis;
    if (grid.dim == 1) {
        VecC out(n);
        if (forward)
            fft.fwd(out, data);
        else
            fft.inv(out, data);
        data = out;
        return;
    }
    VecC line(n), out(n);
    // axis 1 (contiguous rows of the axis-0 major layout)
    for (int i = 0; i < n; ++i) {
        line = data.segment(static_cast<Eigen::Index>(i) * n, n);
        if (forward)
            fft.fwd(out, line);
        else
            fft.inv(out, line);
        data.segment(static_cast<Eigen::Index>(i) * n, n) = out;
    }
    // axis 0 (strided)
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) line[i] = data[static_cast<Eigen::Index>(i) * n + j];
        if (forward)
            fft.fwd(out, line);
        else
            fft.inv(out, line);
        for (int i = 0; i < n; ++i) data[static_cast<Eigen::Index>(i) * n + j] = out[i];
    }
}

// (-1)^(sum of per-axis frequency indices); converts between the DFT's
// j=0..N-1 node convention and the box centered at -L/2.
template <typename Scalar>
Scalar center_phase(const SpatialGrid<Scalar>& grid, Eigen::Index flat) {
    const auto idx = grid.unflatten(flat);
    const int parity = grid.dim == 1 ? idx[0] : idx[0] + idx[1];
    return (parity & 1) ? Scalar(-1) : Scalar(1);
}

}  // namespace detail

/// Riemann-sum Fourier transform: mode_m = spacing^d * sum_j e^{-i k_m r_j} psi_j.
/// The k=0 mode is computed by the same compensated reduction as quadrature(),
/// so mode(0) == quadrature(field) holds bit for bit.
template <typename Scalar>
SpectralField<Scalar> forward_transform(const DensityField<Scalar>& field) {
    auto data = field.values;
    detail::fft_all_axes(field.grid, data, true);
    const Scalar h = field.grid.spacing();
    Scalar cell = h;
    if (field.grid.dim == 2) cell *= h;
    for (Eigen::Index p = 0; p < data.size(); ++p)
        data[p] *= cell * detail::center_phase(field.grid, p);
    data[0] = quadrature(field);
    return SpectralField<Scalar>(field.grid, std::move(data));
}

/// Exact inverse of forward_transform (up to round-off).
template <typename Scalar>
DensityField<Scalar> inverse_transform(const SpectralField<Scalar>& spec) {
    auto data = spec.modes;
    for (Eigen::Index p = 0; p < data.size(); ++p)
        data[p] *= detail::center_phase(spec.grid, p);
    detail::fft_all_axes(spec.grid, data, false);
    const Scalar inv_h = Scalar(1) / spec.grid.spacing();
    Scalar scale = inv_h;
    if (spec.grid.dim == 2) scale *= inv_h;
    data *= scale;
    return DensityField<Scalar>(spec.grid, std::move(data));
}

/// Normalized Gaussian bump. Requires |mean_i| + 6*sigma < L/2 on every axis
/// so that the periodic-box samples carry the full mass; the samples are then
/// rescaled by the computed quadrature, making the normalization exact by
/// construction.
template <typename Scalar>
DensityField<Scalar> make_gaussian(const SpatialGrid<Scalar>& grid,
                                   const Eigen::Vector<Scalar, Eigen::Dynamic>& mean,
                                   Scalar sigma) {
    using Complex = std::complex<Scalar>;
    if (!(sigma > Scalar(0))) throw std::invalid_argument("make_gaussian: sigma must be > 0");
    if (mean.size() != grid.dim)
        throw std::invalid_argument("make_gaussian: mean dimension does not match grid");
    for (int axis = 0; axis < grid.dim; ++axis) {
        if (!(std::abs(mean[axis]) + Scalar(6) * sigma < grid.length / Scalar(2)))
            throw std::invalid_argument(
                "make_gaussian: grid too small to contain mean + 6 sigma on every axis");
    }
    const Scalar norm1d =
        Scalar(1) / (sigma * std::sqrt(Scalar(2) * std::numbers::pi_v<Scalar>));
    Eigen::Vector<Complex, Eigen::Dynamic> values(grid.node_count());
    for (Eigen::Index flat = 0; flat < values.size(); ++flat) {
        const auto idx = grid.unflatten(flat);
        Scalar v = Scalar(1);
        for (int axis = 0; axis < grid.dim; ++axis) {
            const Scalar x = grid.coordinate(idx[axis]) - mean[axis];
            v *= norm1d * std::exp(-x * x / (Scalar(2) * sigma * sigma));
        }
        values[flat] = Complex(v, Scalar(0));
    }
    DensityField<Scalar> field(grid, std::move(values));
    const Complex q = quadrature(field);
    field.values /= q;
    return field;
}

}  // namespace fracdiff
