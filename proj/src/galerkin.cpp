#include "fucik/galerkin.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

#include "fucik/errors.hpp"

namespace fucik {

namespace {

inline double nodal(const DiscreteFunction& u, int dof) { return dof < 0 ? 0.0 : u[dof]; }

}  // namespace

double pow_abs(double x, double p) {
    const double a = std::abs(x);
    if (p == 2.0) return a * a;
    if (p == 3.0) return a * a * a;
    if (p == 4.0) return (a * a) * (a * a);
    if (a == 0.0) return 0.0;
    return std::pow(a, p);
}

Matrix assemble_stiffness(const Mesh& mesh, double s, int quad_order, double truncation_radius) {
    const PairRule rule(mesh, s, 2.0, quad_order, truncation_radius);
    const int n = mesh.num_dofs();
    Matrix A = Matrix::Zero(n, n);

    rule.visit_pairs([&](const Element& ex, const Element& ey, std::span<const PairPoint> pts) {
        const std::array<int, 4> dofs{ex.dof0, ex.dof1, ey.dof0, ey.dof1};
        double local[4][4] = {};
        for (const auto& pt : pts) {
            const std::array<double, 4> c{1.0 - pt.lx, pt.lx, -(1.0 - pt.ly), -pt.ly};
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b) local[a][b] += pt.w * c[a] * c[b];
        }
        for (int a = 0; a < 4; ++a) {
            if (dofs[a] < 0) continue;
            for (int b = 0; b < 4; ++b) {
                if (dofs[b] < 0 || dofs[a] > dofs[b]) continue;
                A(dofs[a], dofs[b]) += local[a][b];
            }
        }
    });

    const auto nodes = rule.exterior_nodes();
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const Element& el = mesh.elements[e];
        const auto w = rule.exterior_weights(e);
        const std::array<int, 2> dofs{el.dof0, el.dof1};
        double local[2][2] = {};
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            const std::array<double, 2> c{1.0 - nodes[k], nodes[k]};
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) local[a][b] += w[k] * c[a] * c[b];
        }
        for (int a = 0; a < 2; ++a) {
            if (dofs[a] < 0) continue;
            for (int b = 0; b < 2; ++b) {
                if (dofs[b] < 0 || dofs[a] > dofs[b]) continue;
                A(dofs[a], dofs[b]) += local[a][b];
            }
        }
    }

    A.triangularView<Eigen::StrictlyLower>() = A.transpose().triangularView<Eigen::StrictlyLower>();
    return A;
}

MassForms assemble_mass(const Mesh& mesh) {
    const int n = mesh.num_dofs();
    MassForms out{Matrix::Zero(n, n), Vector::Zero(n)};
    for (const auto& el : mesh.elements) {
        const double h = el.length();
        const std::array<int, 2> dofs{el.dof0, el.dof1};
        for (int a = 0; a < 2; ++a) {
            if (dofs[a] < 0) continue;
            out.m_lumped[dofs[a]] += 0.5 * h;
            for (int b = 0; b < 2; ++b) {
                if (dofs[b] < 0) continue;
                out.M(dofs[a], dofs[b]) += (a == b ? h / 3.0 : h / 6.0);
            }
        }
    }
    return out;
}

GalerkinForms assemble_forms(const Mesh& mesh, const ProblemConfig& config) {
    GalerkinForms forms;
    forms.A = assemble_stiffness(mesh, config.s, config.quad_order, config.truncation_radius);
    auto mass = assemble_mass(mesh);
    forms.M = std::move(mass.M);
    forms.m_lumped = std::move(mass.m_lumped);
    return forms;
}

GagliardoEnergy::GagliardoEnergy(const Mesh& mesh, double s, double p, int quad_order,
                                 double truncation_radius)
    : n_(mesh.num_dofs()), p_(p) {
    const PairRule rule(mesh, s, p, quad_order, truncation_radius);
    rule.visit_pairs([&](const Element& ex, const Element& ey, std::span<const PairPoint> pts) {
        const std::array<int, 4> dofs{ex.dof0, ex.dof1, ey.dof0, ey.dof1};
        if (dofs[0] < 0 && dofs[1] < 0 && dofs[2] < 0 && dofs[3] < 0) return;
        const int begin = static_cast<int>(points_.size());
        points_.insert(points_.end(), pts.begin(), pts.end());
        blocks_.push_back({dofs, begin, static_cast<int>(points_.size())});
    });
    const auto nodes = rule.exterior_nodes();
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const Element& el = mesh.elements[e];
        if (el.dof0 < 0 && el.dof1 < 0) continue;
        const auto w = rule.exterior_weights(e);
        const int begin = static_cast<int>(ext_points_.size());
        for (std::size_t k = 0; k < nodes.size(); ++k)
            if (w[k] != 0.0) ext_points_.push_back({nodes[k], w[k]});
        ext_blocks_.push_back({{el.dof0, el.dof1}, begin, static_cast<int>(ext_points_.size())});
    }
}

double GagliardoEnergy::energy(const DiscreteFunction& u) const {
    if (u.size() != n_) throw ConfigError("discrete function has wrong length");
    double total = 0.0;
    for (const auto& b : blocks_) {
        const double u0 = nodal(u, b.dofs[0]), u1 = nodal(u, b.dofs[1]);
        const double v0 = nodal(u, b.dofs[2]), v1 = nodal(u, b.dofs[3]);
        double acc = 0.0;
        for (int k = b.begin; k < b.end; ++k) {
            const auto& pt = points_[k];
            const double d = (u0 + pt.lx * (u1 - u0)) - (v0 + pt.ly * (v1 - v0));
            acc += pt.w * pow_abs(d, p_);
        }
        total += acc;
    }
    for (const auto& b : ext_blocks_) {
        const double u0 = nodal(u, b.dofs[0]), u1 = nodal(u, b.dofs[1]);
        double acc = 0.0;
        for (int k = b.begin; k < b.end; ++k) {
            const auto& pt = ext_points_[k];
            acc += pt.w * pow_abs(u0 + pt.lx * (u1 - u0), p_);
        }
        total += acc;
    }
    return total;
}

double GagliardoEnergy::energy_and_operator(const DiscreteFunction& u, Vector& Ap) const {
    if (u.size() != n_) throw ConfigError("discrete function has wrong length");
    Ap.setZero(n_);
    double total = 0.0;
    auto add = [&](int dof, double v) {
        if (dof >= 0) Ap[dof] += v;
    };
    for (const auto& b : blocks_) {
        const double u0 = nodal(u, b.dofs[0]), u1 = nodal(u, b.dofs[1]);
        const double v0 = nodal(u, b.dofs[2]), v1 = nodal(u, b.dofs[3]);
        double acc = 0.0;
        std::array<double, 4> g{};
        for (int k = b.begin; k < b.end; ++k) {
            const auto& pt = points_[k];
            const double d = (u0 + pt.lx * (u1 - u0)) - (v0 + pt.ly * (v1 - v0));
            const double dp = pow_abs(d, p_);
            acc += pt.w * dp;
            // |d|^{p-2} d = |d|^p / d, guarded at d = 0.
            const double flux = d == 0.0 ? 0.0 : pt.w * dp / d;
            g[0] += flux * (1.0 - pt.lx);
            g[1] += flux * pt.lx;
            g[2] -= flux * (1.0 - pt.ly);
            g[3] -= flux * pt.ly;
        }
        total += acc;
        for (int a = 0; a < 4; ++a) add(b.dofs[a], g[a]);
    }
    for (const auto& b : ext_blocks_) {
        const double u0 = nodal(u, b.dofs[0]), u1 = nodal(u, b.dofs[1]);
        double acc = 0.0;
        std::array<double, 2> g{};
        for (int k = b.begin; k < b.end; ++k) {
            const auto& pt = ext_points_[k];
            const double x = u0 + pt.lx * (u1 - u0);
            const double xp = pow_abs(x, p_);
            acc += pt.w * xp;
            const double flux = x == 0.0 ? 0.0 : pt.w * xp / x;
            g[0] += flux * (1.0 - pt.lx);
            g[1] += flux * pt.lx;
        }
        total += acc;
        add(b.dofs[0], g[0]);
        add(b.dofs[1], g[1]);
    }
    return total;
}

Vector GagliardoEnergy::operator_Ap(const DiscreteFunction& u) const {
    Vector g;
    energy_and_operator(u, g);
    return g;
}

double GagliardoEnergy::apply(const DiscreteFunction& u, const DiscreteFunction& v) const {
    if (v.size() != n_) throw ConfigError("discrete function has wrong length");
    return operator_Ap(u).dot(v);
}

double gagliardo_energy_p(const GagliardoEnergy& energy, const DiscreteFunction& u) {
    return energy.energy(u);
}

double apply_Ap(const GagliardoEnergy& energy, const DiscreteFunction& u, const DiscreteFunction& v) {
    return energy.apply(u, v);
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << std::setprecision(17);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << m(i, j);
        }
        out << '\n';
    }
}

}  // namespace fucik
