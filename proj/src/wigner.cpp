#include "duffing/wigner.hpp"

#include "duffing/csv.hpp"
#include "duffing/errors.hpp"
#include "duffing/kernels.hpp"
#include "duffing/rwa.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace duffing {

std::vector<double> PhaseGrid::xs() const {
    std::vector<double> v(nx);
    for (int i = 0; i < nx; ++i) v[i] = x(i);
    return v;
}

std::vector<double> PhaseGrid::ps() const {
    std::vector<double> v(np);
    for (int j = 0; j < np; ++j) v[j] = p(j);
    return v;
}

PhaseGrid square_grid(double extent, int points) {
    if (!(extent > 0.0) || points < 3) throw ConfigError("grid needs extent > 0 and >= 3 points");
    return PhaseGrid{-extent, extent, -extent, extent, points, points};
}

PhaseGrid default_grid(const OscillatorParams& params) {
    const FixedPoints fp = fixed_points(renormalized_frame(params));
    double reach = 0.0;
    for (const auto& r : fp.roots) reach = std::max(reach, std::abs(r.x));
    return square_grid(1.2 * reach + 4.0, 201);
}

double WignerField::integral() const {
    return std::accumulate(values.begin(), values.end(), 0.0) * grid.dx() * grid.dp();
}

double WignerField::min_value() const { return *std::min_element(values.begin(), values.end()); }
double WignerField::max_value() const { return *std::max_element(values.begin(), values.end()); }

double WignerField::boundary_max_abs() const {
    double b = 0.0;
    for (int i = 0; i < grid.nx; ++i) {
        b = std::max({b, std::abs(at(i, 0)), std::abs(at(i, grid.np - 1))});
    }
    for (int j = 0; j < grid.np; ++j) {
        b = std::max({b, std::abs(at(0, j)), std::abs(at(grid.nx - 1, j))});
    }
    return b;
}

double WignerField::x_marginal(int i) const {
    double s = 0.0;
    for (int j = 0; j < grid.np; ++j) s += at(i, j);
    return s * grid.dp();
}

ComplexMatrix to_rotating_frame(const ComplexMatrix& rho, double nu, double t) {
    ComplexMatrix out = rho;
    for (int c = 0; c < rho.cols(); ++c)
        for (int r = 0; r < rho.rows(); ++r)
            out(r, c) *= std::polar(1.0, nu * t * static_cast<double>(r - c));
    return out;
}

WignerField wigner(const DensityMatrix& state, const PhaseGrid& grid, Frame frame, double nu,
                   bool check_boundary) {
    WignerField field;
    field.grid = grid;
    field.frame = frame;
    field.time = state.t;
    field.values.resize(static_cast<std::size_t>(grid.nx) * grid.np);
    const ComplexMatrix rho = frame == Frame::Rotating ? to_rotating_frame(state.rho, nu, state.t)
                                                       : state.rho;
    const auto xs = grid.xs();
    const auto ps = grid.ps();
    kernels::wigner_grid(rho, xs, ps, field.values);

    if (check_boundary) {
        double peak = 0.0;
        for (double v : field.values) peak = std::max(peak, std::abs(v));
        const double edge = field.boundary_max_abs();
        if (edge > 1e-6 * peak) {
            std::ostringstream os;
            os << "phase-space grid too small: boundary |W|=" << edge << " vs max " << peak;
            throw GridError(os.str());
        }
    }
    return field;
}

int count_lobes(const WignerField& field, double threshold_fraction) {
    const int nx = field.grid.nx;
    const int np = field.grid.np;
    const double level = threshold_fraction * field.max_value();
    std::vector<int> label(field.values.size(), 0);
    std::vector<int> stack;
    int lobes = 0;
    for (int start = 0; start < nx * np; ++start) {
        if (label[start] || field.values[start] <= level) continue;
        ++lobes;
        label[start] = lobes;
        stack.push_back(start);
        while (!stack.empty()) {
            const int k = stack.back();
            stack.pop_back();
            const int i = k / np;
            const int j = k % np;
            const int nb[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
            for (const auto& q : nb) {
                if (q[0] < 0 || q[0] >= nx || q[1] < 0 || q[1] >= np) continue;
                const int m = q[0] * np + q[1];
                if (label[m] || field.values[m] <= level) continue;
                label[m] = lobes;
                stack.push_back(m);
            }
        }
    }
    return lobes;
}

double coherent_overlap(const DensityMatrix& state, std::complex<double> alpha) {
    const int n = state.dim();
    Eigen::VectorXcd v(n);
    std::complex<double> term = std::exp(-0.5 * std::norm(alpha));
    for (int k = 0; k < n; ++k) {
        if (k > 0) term *= alpha / std::sqrt(static_cast<double>(k));
        v(k) = term;
    }
    return (v.adjoint() * state.rho * v)(0, 0).real();
}

CoherentFit coherent_fidelity(const DensityMatrix& state, std::optional<std::complex<double>> seed,
                              int max_iterations) {
    std::complex<double> start;
    if (seed) {
        start = *seed;
    } else {
        const int n = state.dim();
        RealMatrix a = RealMatrix::Zero(n, n);
        for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
        start = (state.rho * a.cast<std::complex<double>>()).trace();
    }

    using Point = std::array<double, 2>;
    auto cost = [&](const Point& q) { return -coherent_overlap(state, {q[0], q[1]}); };

    std::array<Point, 3> simplex{Point{start.real(), start.imag()},
                                 Point{start.real() + 0.3, start.imag()},
                                 Point{start.real(), start.imag() + 0.3}};
    std::array<double, 3> values{};
    for (int k = 0; k < 3; ++k) values[k] = cost(simplex[k]);

    auto mix = [](const Point& a, const Point& b, double t) {
        return Point{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
    };

    for (int it = 0; it < max_iterations; ++it) {
        std::array<int, 3> order{0, 1, 2};
        std::sort(order.begin(), order.end(), [&](int i, int j) { return values[i] < values[j]; });
        const Point best = simplex[order[0]];
        const Point mid = simplex[order[1]];
        const Point worst = simplex[order[2]];
        const double f_best = values[order[0]];
        const double f_mid = values[order[1]];
        const double f_worst = values[order[2]];

        const double size = std::max(std::hypot(mid[0] - best[0], mid[1] - best[1]),
                                     std::hypot(worst[0] - best[0], worst[1] - best[1]));
        if (size < 1e-9 && f_worst - f_best < 1e-14) {
            return CoherentFit{{best[0], best[1]}, -f_best, it};
        }

        const Point centroid{0.5 * (best[0] + mid[0]), 0.5 * (best[1] + mid[1])};
        const Point reflected = mix(centroid, worst, -1.0);
        const double f_ref = cost(reflected);
        Point next = reflected;
        double f_next = f_ref;
        if (f_ref < f_best) {
            const Point expanded = mix(centroid, worst, -2.0);
            const double f_exp = cost(expanded);
            if (f_exp < f_ref) {
                next = expanded;
                f_next = f_exp;
            }
        } else if (f_ref >= f_mid) {
            const Point contracted = f_ref < f_worst ? mix(centroid, reflected, 0.5)
                                                     : mix(centroid, worst, 0.5);
            const double f_con = cost(contracted);
            if (f_con < std::min(f_ref, f_worst)) {
                next = contracted;
                f_next = f_con;
            } else {
                // shrink toward the best vertex
                for (int k : {order[1], order[2]}) {
                    simplex[k] = mix(best, simplex[k], 0.5);
                    values[k] = cost(simplex[k]);
                }
                continue;
            }
        }
        simplex[order[2]] = next;
        values[order[2]] = f_next;
    }
    throw ConvergenceError("coherent_fidelity: simplex search did not converge");
}

void write_wigner(const WignerField& field, const std::filesystem::path& csv_path,
                  const std::string& manifest_name) {
    CsvTable table;
    table.header.push_back("x");
    for (int j = 0; j < field.grid.np; ++j) table.header.push_back(format_double(field.grid.p(j)));
    for (int i = 0; i < field.grid.nx; ++i) {
        std::vector<std::string> row;
        row.reserve(field.grid.np + 1);
        row.push_back(format_double(field.grid.x(i)));
        for (int j = 0; j < field.grid.np; ++j) row.push_back(format_double(field.at(i, j)));
        table.rows.push_back(std::move(row));
    }
    write_csv(csv_path, table);

    nlohmann::json meta;
    meta["kind"] = "wigner";
    meta["frame"] = field.frame == Frame::Rotating ? "rotating" : "lab";
    meta["time"] = field.time;
    meta["x_min"] = field.grid.x_min;
    meta["x_max"] = field.grid.x_max;
    meta["p_min"] = field.grid.p_min;
    meta["p_max"] = field.grid.p_max;
    meta["nx"] = field.grid.nx;
    meta["np"] = field.grid.np;
    meta["layout"] = "rows indexed by x, columns by p";
    meta["manifest"] = manifest_name;
    std::ofstream out(csv_path.string() + ".json");
    out << meta.dump(2) << "\n";
}

WignerField read_wigner(const std::filesystem::path& csv_path) {
    std::ifstream in(csv_path.string() + ".json");
    if (!in) throw ConfigError("missing Wigner sidecar for " + csv_path.string());
    const nlohmann::json meta = nlohmann::json::parse(in);
    WignerField field;
    field.grid.x_min = meta.at("x_min");
    field.grid.x_max = meta.at("x_max");
    field.grid.p_min = meta.at("p_min");
    field.grid.p_max = meta.at("p_max");
    field.grid.nx = meta.at("nx");
    field.grid.np = meta.at("np");
    field.frame = meta.at("frame") == "rotating" ? Frame::Rotating : Frame::Lab;
    field.time = meta.at("time");

    const CsvTable table = read_csv(csv_path);
    if (static_cast<int>(table.rows.size()) != field.grid.nx ||
        static_cast<int>(table.header.size()) != field.grid.np + 1)
        throw ConfigError("Wigner CSV shape does not match its sidecar");
    field.values.reserve(static_cast<std::size_t>(field.grid.nx) * field.grid.np);
    for (const auto& row : table.rows)
        for (std::size_t j = 1; j < row.size(); ++j) field.values.push_back(parse_double(row[j]));
    return field;
}

} // namespace duffing
