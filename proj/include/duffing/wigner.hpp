// wigner.hpp — Wigner functions on phase-space grids and state diagnostics.

#pragma once

#include "duffing/params.hpp"
#include "duffing/propagator.hpp"

#include <complex>
#include <filesystem>
#include <optional>
#include <vector>

namespace duffing {

struct PhaseGrid {
    double x_min{-5.0};
    double x_max{5.0};
    double p_min{-5.0};
    double p_max{5.0};
    int nx{101};
    int np{101};

    double dx() const noexcept { return (x_max - x_min) / (nx - 1); }
    double dp() const noexcept { return (p_max - p_min) / (np - 1); }
    double x(int i) const noexcept { return x_min + i * dx(); }
    double p(int j) const noexcept { return p_min + j * dp(); }
    std::vector<double> xs() const;
    std::vector<double> ps() const;
};

PhaseGrid square_grid(double extent, int points);

// 201 x 201 over [-L, L]^2 with L = 1.2 X + 4, X the largest |fixed point| of
// the renormalized rotating frame (or the linear response radius when there is
// a single root).
PhaseGrid default_grid(const OscillatorParams& params);

enum class Frame { Lab, Rotating };

struct WignerField {
    PhaseGrid grid;
    std::vector<double> values; // row-major, values[i * np + j] = W(x_i, p_j)
    Frame frame{Frame::Lab};
    double time{0.0};

    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * grid.np + j]; }
    double integral() const;      // Riemann sum
    double min_value() const;
    double max_value() const;
    double boundary_max_abs() const;
    // Riemann sum over p at fixed x_i.
    double x_marginal(int i) const;
};

// rho_mn -> rho_mn exp(i nu t (m - n)), i.e. U rho U^dag with U = exp(i nu t a^dag a).
ComplexMatrix to_rotating_frame(const ComplexMatrix& rho, double nu, double t);

// W(x,p) = (1/pi) int <x+y|rho|x-y> exp(-2ipy) dy on `grid`, from the Fock
// kernels.  Rotating frame conjugates the state by exp(i nu t a^dag a) first.
// Throws GridError when the boundary carries more than 1e-6 of max |W| and
// check_boundary is set.
WignerField wigner(const DensityMatrix& state, const PhaseGrid& grid, Frame frame, double nu,
                   bool check_boundary = true);

// Number of 4-connected regions where W exceeds threshold_fraction * max W.
int count_lobes(const WignerField& field, double threshold_fraction = 0.05);

// <alpha|rho|alpha>
double coherent_overlap(const DensityMatrix& state, std::complex<double> alpha);

struct CoherentFit {
    std::complex<double> alpha;
    double fidelity{0.0};
    int iterations{0};
};

// Maximizes <alpha|rho|alpha> with a Nelder-Mead simplex seeded at
// (<x> + i<p>)/sqrt2 unless a seed is given.  ConvergenceError after the
// iteration budget.
CoherentFit coherent_fidelity(const DensityMatrix& state,
                              std::optional<std::complex<double>> seed = std::nullopt,
                              int max_iterations = 4000);

// Dense CSV: header "x",p_0..p_{np-1}; one row per x.  A JSON sidecar
// `<csv>.json` carries grid, frame and time.
void write_wigner(const WignerField& field, const std::filesystem::path& csv_path,
                  const std::string& manifest_name = "manifest.json");
WignerField read_wigner(const std::filesystem::path& csv_path);

} // namespace duffing
