#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "fracdiff/finite_difference.hpp"
#include "fracdiff/fractional.hpp"

namespace fracdiff {

using Complex = std::complex<double>;

/// Characteristic function f(s, ik) that is polynomial in s, with
/// k-dependent coefficients (ascending powers, degree+1 entries).
struct CharPolynomial {
    int degree;
    std::function<Eigen::VectorXcd(const Eigen::Vector2d& k)> coefficients;

    Eigen::VectorXcd coeffs_at(const Eigen::Vector2d& k) const {
        Eigen::VectorXcd c = coefficients(k);
        if (c.size() != degree + 1)
            throw std::invalid_argument("CharPolynomial: coefficient count != degree + 1");
        return c;
    }
};

inline Complex polynomial_eval(const Eigen::VectorXcd& coeffs, Complex s) {
    Complex acc = 0.0;
    for (Eigen::Index i = coeffs.size() - 1; i >= 0; --i) acc = acc * s + coeffs[i];
    return acc;
}

/// All roots of a complex-coefficient polynomial: companion-matrix
/// eigenvalues followed by one Newton polish per root.
inline std::vector<Complex> polynomial_roots(const Eigen::VectorXcd& coeffs) {
    const Eigen::Index n = coeffs.size() - 1;
    if (n < 1) throw std::invalid_argument("polynomial_roots: degree must be >= 1");
    const double scale = coeffs.cwiseAbs().maxCoeff();
    if (!(std::abs(coeffs[n]) > 1e-14 * scale))
        throw std::invalid_argument("polynomial_roots: leading coefficient vanishes");
    Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) companion(i, n - 1) = -coeffs[i] / coeffs[n];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("dispersion: companion eigensolver did not converge");
    std::vector<Complex> roots(n);
    Eigen::VectorXcd deriv(n);
    for (Eigen::Index i = 0; i < n; ++i) deriv[i] = coeffs[i + 1] * static_cast<double>(i + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        Complex r = solver.eigenvalues()[i];
        const Complex dp = polynomial_eval(deriv, r);
        if (std::abs(dp) > 1e-12 * scale) r -= polynomial_eval(coeffs, r) / dp;
        roots[i] = r;
    }
    std::sort(roots.begin(), roots.end(), [](Complex a, Complex b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return roots;
}

/// Exponential-polynomial solution basis {t^(l-1) exp(s_j t), l <= d_j}.
struct SolutionBasis {
    struct Root {
        Complex value;
        int multiplicity;
    };
    std::vector<Root> roots;
    int degree = 0;  // sum of multiplicities, the count of free constants

    int constant_count() const {
        int n = 0;
        for (const auto& r : roots) n += r.multiplicity;
        return n;
    }
    /// Evaluate sum_j sum_l a[j][l] t^(l-1) exp(s_j t).
    Complex evaluate(const std::vector<std::vector<Complex>>& a, double t) const {
        Complex acc = 0.0;
        for (std::size_t j = 0; j < roots.size(); ++j) {
            double tp = 1.0;
            for (int l = 0; l < roots[j].multiplicity; ++l) {
                acc += a[j][l] * tp * std::exp(roots[j].value * t);
                tp *= t;
            }
        }
        return acc;
    }
};

/// Cluster roots within 1e-8 relative distance into multiplicity groups.
inline SolutionBasis ode_solution_basis(const Eigen::VectorXcd& coeffs) {
    const auto roots = polynomial_roots(coeffs);
    SolutionBasis basis;
    basis.degree = static_cast<int>(coeffs.size()) - 1;
    constexpr double tol = 1e-8;
    for (const Complex r : roots) {
        bool merged = false;
        for (auto& cluster : basis.roots) {
            if (std::abs(r - cluster.value) <= tol * std::max(1.0, std::abs(cluster.value))) {
                // running mean keeps the representative centered
                cluster.value =
                    (cluster.value * static_cast<double>(cluster.multiplicity) + r) /
                    static_cast<double>(cluster.multiplicity + 1);
                ++cluster.multiplicity;
                merged = true;
                break;
            }
        }
        if (!merged) basis.roots.push_back({r, 1});
    }
    return basis;
}

inline SolutionBasis ode_solution_basis(const CharPolynomial& f, const Eigen::Vector2d& k) {
    return ode_solution_basis(f.coeffs_at(k));
}

enum class UniquenessStatus { unique, multiple_lhp_zeros, nonsimple_zero, no_lhp_zero };

inline const char* to_string(UniquenessStatus s) {
    switch (s) {
        case UniquenessStatus::unique: return "unique";
        case UniquenessStatus::multiple_lhp_zeros: return "multiple_lhp_zeros";
        case UniquenessStatus::nonsimple_zero: return "nonsimple_zero";
        case UniquenessStatus::no_lhp_zero: return "no_lhp_zero";
    }
    return "?";
}

/// E(k) = -(k.k)^(1/beta), the closed left-half-plane zero of the
/// translation-invariant fractional dispersion; checks the defining branch
/// identity [exp(-i pi) E]^beta = k.k (exponent-additive form, global branch)
/// to 1e-12 before returning.
inline Complex weyl_dispersion(const FracOrder& beta, const Eigen::Vector2d& k) {
    const double ksq = k.squaredNorm();
    if (ksq == 0.0) return 0.0;
    const Complex E(-std::pow(ksq, 1.0 / beta.beta), 0.0);
    const Complex phase = std::exp(Complex(0.0, -std::numbers::pi * beta.beta));
    const Complex check = phase * branch_power(E, beta.beta);
    if (std::abs(check - ksq) > 1e-12 * std::max(1.0, ksq))
        throw std::runtime_error("weyl_dispersion: branch identity violated");
    return E;
}

inline Complex weyl_dispersion(const FracOrder& beta, double k) {
    return weyl_dispersion(beta, Eigen::Vector2d(k, 0.0));
}

/// Dispersion relation E(k): a closed-form family, the tracked simple zero
/// of a characteristic polynomial along a k path, or a bare table.
class DispersionRelation {
public:
    struct PolyRootEntry {
        double k;
        std::vector<SolutionBasis::Root> roots;
        std::optional<Complex> selected;
        UniquenessStatus status;
        bool boundary_zero;  // a zero sits on the imaginary axis (within tol)
        double residual;     // |f(E, ik)| when selected
    };

    static DispersionRelation heat() {
        return closed("heat", [](const Eigen::Vector2d& k) { return Complex(-k.squaredNorm(), 0.0); });
    }
    /// E = -i v k - D k^2 + i mu3 k^3 (one-dimensional family).
    static DispersionRelation drift_diffusion(double v, double diffusivity, double mu3 = 0.0) {
        return closed("drift_diffusion", [v, diffusivity, mu3](const Eigen::Vector2d& k) {
            if (k[1] != 0.0)
                throw std::invalid_argument("drift_diffusion dispersion is one-dimensional");
            const double kk = k[0];
            return Complex(-diffusivity * kk * kk, -v * kk + mu3 * kk * kk * kk);
        });
    }
    static DispersionRelation weyl_fractional(double beta) {
        FracOrder order(beta);
        return closed("weyl_fractional",
                      [order](const Eigen::Vector2d& k) { return weyl_dispersion(order, k); });
    }
    static DispersionRelation from_function(std::function<Complex(const Eigen::Vector2d&)> f,
                                            std::string name = "custom") {
        return closed(std::move(name), std::move(f));
    }

    /// Solve f(., ik) per k of a sorted 1D path, classify the closed-left-
    /// half-plane zeros, and keep E(k) branch-continuous by nearest-root
    /// continuation.
    static DispersionRelation from_polynomial(CharPolynomial f, Eigen::VectorXd k_path) {
        std::sort(k_path.data(), k_path.data() + k_path.size());
        PolyRoot table;
        table.poly = std::move(f);
        table.entries.reserve(k_path.size());
        std::optional<Complex> previous;
        for (Eigen::Index i = 0; i < k_path.size(); ++i) {
            PolyRootEntry e = classify(table.poly, k_path[i], previous);
            if (e.selected) previous = e.selected;
            table.entries.push_back(std::move(e));
        }
        DispersionRelation rel;
        rel.family_ = "poly_root";
        rel.impl_ = std::move(table);
        return rel;
    }

    static DispersionRelation tabulated(Eigen::VectorXd k, Eigen::VectorXcd e_values) {
        if (k.size() != e_values.size() || k.size() < 2)
            throw std::invalid_argument("tabulated dispersion: need matching k/E of size >= 2");
        DispersionRelation rel;
        rel.family_ = "tabulated";
        rel.impl_ = Tabulated{std::move(k), std::move(e_values)};
        return rel;
    }

    const std::string& family() const { return family_; }
    bool supports_off_table() const { return !std::holds_alternative<Tabulated>(impl_); }

    Complex evaluate(const Eigen::Vector2d& k) const {
        if (const auto* c = std::get_if<Closed>(&impl_)) return c->eval(k);
        if (const auto* t = std::get_if<Tabulated>(&impl_)) {
            if (k[1] != 0.0)
                throw std::invalid_argument("tabulated dispersion is one-dimensional");
            return interpolate(*t, k[0]);
        }
        const auto& table = std::get<PolyRoot>(impl_);
        // exact table hit, else re-solve with continuation from the nearest entry
        const PolyRootEntry* nearest = nullptr;
        for (const auto& e : table.entries) {
            if (k[1] == 0.0 && e.k == k[0] && e.selected) return *e.selected;
            if (!nearest || std::abs(e.k - k[0]) < std::abs(nearest->k - k[0])) nearest = &e;
        }
        std::optional<Complex> seed;
        if (nearest && nearest->selected) seed = nearest->selected;
        const PolyRootEntry e = classify(table.poly, k[0], seed);
        if (!e.selected)
            throw std::runtime_error("dispersion: no admissible zero at requested k");
        return *e.selected;
    }
    Complex evaluate(double k) const { return evaluate(Eigen::Vector2d(k, 0.0)); }

    bool all_unique() const {
        if (const auto* t = std::get_if<PolyRoot>(&impl_)) {
            for (const auto& e : t->entries)
                if (e.status != UniquenessStatus::unique) return false;
        }
        return true;  // closed families are the selected branch by construction
    }
    const std::vector<PolyRootEntry>& table() const {
        if (const auto* t = std::get_if<PolyRoot>(&impl_)) return t->entries;
        throw std::logic_error("dispersion table only exists for polynomial dispersions");
    }
    double max_residual() const {
        double r = 0.0;
        if (const auto* t = std::get_if<PolyRoot>(&impl_))
            for (const auto& e : t->entries) r = std::max(r, e.residual);
        return r;
    }

private:
    struct Closed {
        std::function<Complex(const Eigen::Vector2d&)> eval;
    };
    struct PolyRoot {
        CharPolynomial poly;
        std::vector<PolyRootEntry> entries;
    };
    struct Tabulated {
        Eigen::VectorXd k;
        Eigen::VectorXcd e;
    };

    static DispersionRelation closed(std::string name,
                                     std::function<Complex(const Eigen::Vector2d&)> f) {
        DispersionRelation rel;
        rel.family_ = std::move(name);
        rel.impl_ = Closed{std::move(f)};
        return rel;
    }

    static Complex interpolate(const Tabulated& t, double k) {
        if (k < t.k[0] || k > t.k[t.k.size() - 1])
            throw std::invalid_argument("tabulated dispersion: k outside table");
        Eigen::Index hi = 1;
        while (hi < t.k.size() - 1 && t.k[hi] < k) ++hi;
        const double w = (k - t.k[hi - 1]) / (t.k[hi] - t.k[hi - 1]);
        return (1.0 - w) * t.e[hi - 1] + w * t.e[hi];
    }

    static PolyRootEntry classify(const CharPolynomial& f, double k,
                                  const std::optional<Complex>& previous) {
        const Eigen::VectorXcd coeffs = f.coeffs_at(Eigen::Vector2d(k, 0.0));
        const SolutionBasis basis = ode_solution_basis(coeffs);
        PolyRootEntry e;
        e.k = k;
        e.roots = basis.roots;
        double root_scale = 1.0;
        for (const auto& r : basis.roots) root_scale = std::max(root_scale, std::abs(r.value));
        const double axis_tol = 1e-9 * root_scale;
        std::vector<const SolutionBasis::Root*> lhp;
        e.boundary_zero = false;
        for (const auto& r : basis.roots) {
            if (r.value.real() <= axis_tol) {
                lhp.push_back(&r);
                if (std::abs(r.value.real()) <= axis_tol) e.boundary_zero = true;
            }
        }
        if (lhp.empty()) {
            e.status = UniquenessStatus::no_lhp_zero;
        } else if (lhp.size() == 1) {
            e.status = lhp[0]->multiplicity == 1 ? UniquenessStatus::unique
                                                 : UniquenessStatus::nonsimple_zero;
            e.selected = lhp[0]->value;
        } else {
            e.status = UniquenessStatus::multiple_lhp_zeros;
            const SolutionBasis::Root* pick = lhp[0];
            if (previous) {
                for (const auto* r : lhp)
                    if (std::abs(r->value - *previous) < std::abs(pick->value - *previous))
                        pick = r;
            } else {
                for (const auto* r : lhp)
                    if (std::abs(r->value) < std::abs(pick->value)) pick = r;
            }
            e.selected = pick->value;
        }
        e.residual = e.selected ? std::abs(polynomial_eval(coeffs, *e.selected)) : 0.0;
        return e;
    }

    std::string family_;
    std::variant<Closed, PolyRoot, Tabulated> impl_;
};

inline DispersionRelation find_dispersion(const CharPolynomial& f, const Eigen::VectorXd& k_set) {
    return DispersionRelation::from_polynomial(f, k_set);
}

enum class RateFlag { zero, finite, divergent };

inline const char* to_string(RateFlag f) {
    switch (f) {
        case RateFlag::zero: return "zero";
        case RateFlag::finite: return "finite";
        case RateFlag::divergent: return "divergent";
    }
    return "?";
}

/// Growth rate of one connected moment under exp(t E(k)) evolution:
/// [prod_j (i d/dk_j)^(alpha_j) E](0).
struct CumulantRate {
    std::array<int, 2> alpha{0, 0};
    Complex value{0.0, 0.0};  // NaN when divergent
    RateFlag flag = RateFlag::finite;
    double coarse_magnitude = 0.0;  // |FD(h)|
    double fine_magnitude = 0.0;    // |FD(h/2)|
};

namespace detail {

inline Complex tensor_fd(const DispersionRelation& E, const std::array<int, 2>& alpha, int dim,
                         double h, double& abs_weight_sum) {
    std::array<Eigen::VectorXd, 2> w;
    std::array<int, 2> hw{0, 0};
    for (int axis = 0; axis < dim; ++axis) {
        if (alpha[axis] == 0) {
            hw[axis] = 0;
            w[axis] = Eigen::VectorXd::Ones(1);
        } else {
            hw[axis] = alpha[axis] <= 2 ? 1 : 2;
            w[axis] = central_weights(alpha[axis], hw[axis], h);
        }
    }
    Complex acc = 0.0;
    abs_weight_sum = 0.0;
    const int n0 = 2 * hw[0] + 1;
    const int n1 = dim == 2 ? 2 * hw[1] + 1 : 1;
    for (int i = 0; i < n0; ++i) {
        for (int j = 0; j < n1; ++j) {
            const double weight = w[0][i] * (dim == 2 ? w[1][j] : 1.0);
            if (weight == 0.0) continue;
            Eigen::Vector2d k((i - hw[0]) * h, dim == 2 ? (j - hw[1]) * h : 0.0);
            acc += weight * E.evaluate(k);
            abs_weight_sum += std::abs(weight);
        }
    }
    return acc;
}

}  // namespace detail

/// Central finite differences of E at k = 0 with Richardson refinement
/// (h and h/2). A rate whose raw estimate grows by >= 2x under refinement is
/// flagged divergent and carries no fabricated value.
inline std::vector<CumulantRate> cumulant_rates(const DispersionRelation& E, int dim,
                                                int max_order, double h) {
    if (max_order < 1 || max_order > 4)
        throw std::invalid_argument("cumulant_rates: max_order must be in 1..4");
    if (dim != 1 && dim != 2) throw std::invalid_argument("cumulant_rates: dim must be 1 or 2");
    if (!E.supports_off_table())
        throw std::invalid_argument("cumulant_rates: tabulated dispersions cannot be refined");
    std::vector<std::array<int, 2>> indices;
    if (dim == 1) {
        for (int a = 1; a <= max_order; ++a) indices.push_back({a, 0});
    } else {
        for (int total = 1; total <= max_order; ++total)
            for (int a0 = total; a0 >= 0; --a0) indices.push_back({a0, total - a0});
    }
    std::vector<CumulantRate> out;
    out.reserve(indices.size());
    for (const auto& alpha : indices) {
        const int total = alpha[0] + alpha[1];
        double wsum_h = 0.0, wsum_h2 = 0.0;
        const Complex fd_h = detail::tensor_fd(E, alpha, dim, h, wsum_h);
        const Complex fd_h2 = detail::tensor_fd(E, alpha, dim, 0.5 * h, wsum_h2);
        // i^total prefactor
        constexpr Complex i_unit(0.0, 1.0);
        Complex phase = 1.0;
        for (int p = 0; p < total; ++p) phase *= i_unit;
        CumulantRate rate;
        rate.alpha = alpha;
        rate.coarse_magnitude = std::abs(fd_h);
        rate.fine_magnitude = std::abs(fd_h2);
        // rounding-noise floor of the stencil evaluations
        double stencil_scale = 0.0;
        for (double kk : {h, 2.0 * h})
            stencil_scale = std::max(stencil_scale, std::abs(E.evaluate(Eigen::Vector2d(kk, 0.0))));
        const double noise = 100.0 * std::numeric_limits<double>::epsilon() *
                             std::max(wsum_h, wsum_h2) * std::max(stencil_scale, 1e-30);
        if (rate.fine_magnitude <= noise && rate.coarse_magnitude <= noise) {
            rate.flag = RateFlag::zero;
            rate.value = 0.0;
        } else if (rate.fine_magnitude >= 2.0 * rate.coarse_magnitude &&
                   rate.fine_magnitude > noise) {
            rate.flag = RateFlag::divergent;
            rate.value = Complex(std::numeric_limits<double>::quiet_NaN(),
                                 std::numeric_limits<double>::quiet_NaN());
        } else {
            rate.value = phase * (4.0 * fd_h2 - fd_h) / 3.0;
            rate.flag = std::abs(rate.value) <= std::max(1e-9, 10.0 * noise) ? RateFlag::zero
                                                                             : RateFlag::finite;
        }
        out.push_back(rate);
    }
    return out;
}

}  // namespace fracdiff
