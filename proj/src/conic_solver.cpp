#include <cstdio>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseQR>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "evgrid/conic.hpp"

// Homogeneous self-dual interior-point method with Nesterov-Todd scaling and
// Mehrotra predictor-corrector, following the conelp algorithm of CVXOPT
// (Andersen, Dahl, Vandenberghe), restricted to orthant and second-order
// cones. Rotated cones enter through an orthogonal row rotation. The scaling
// is updated from scaled step vectors rather than recomputed from (s, z),
// which keeps the endgame numerically stable.

namespace evgrid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Block {
    ConeType type;  // NonNeg or Soc
    int first;
    int dim;
};

// Orthogonal involution used on RSOC rows: [r1;r2] -> [(r1+r2)/s2; (r1-r2)/s2].
void rotate_rsoc_pair(Eigen::VectorXd& v, int first) {
    const double s2 = std::sqrt(0.5);
    const double a = v[first], b = v[first + 1];
    v[first] = s2 * (a + b);
    v[first + 1] = s2 * (a - b);
}

double jnrm2(const Eigen::Ref<const Eigen::VectorXd>& v) {
    const double r = v[0] * v[0] - v.tail(v.size() - 1).squaredNorm();
    return std::sqrt(std::max(r, 0.0));
}

// Nesterov-Todd scaling state: W z = W^{-T} s = lambda. Orthant blocks carry
// a diagonal, SOC blocks a hyperbolic Householder (beta, v) with v'Jv = 1.
struct Scaling {
    std::vector<Block> blocks;
    Eigen::VectorXd w_diag;  // orthant entries (1 elsewhere)
    std::vector<double> soc_beta;
    std::vector<Eigen::VectorXd> soc_v;
    std::vector<Eigen::MatrixXd> soc_w;   // dense W per SOC block
    std::vector<Eigen::MatrixXd> soc_w2;  // W^2
    Eigen::VectorXd lambda;

    void rebuild_soc_mats() {
        for (size_t k = 0; k < soc_v.size(); ++k) {
            const auto& v = soc_v[k];
            const double beta = soc_beta[k];
            Eigen::MatrixXd W = 2.0 * beta * (v * v.transpose());
            W(0, 0) -= beta;
            for (int i = 1; i < v.size(); ++i) W(i, i) += beta;
            soc_w[k] = W;
            soc_w2[k] = W * W;
        }
    }
};

Scaling compute_scaling(const std::vector<Block>& blocks, const Eigen::VectorXd& s,
                        const Eigen::VectorXd& z) {
    const int m = static_cast<int>(s.size());
    Scaling sc;
    sc.blocks = blocks;
    sc.w_diag = Eigen::VectorXd::Ones(m);
    sc.lambda = Eigen::VectorXd::Zero(m);
    for (const auto& blk : blocks) {
        if (blk.type == ConeType::NonNeg) {
            for (int i = blk.first; i < blk.first + blk.dim; ++i) {
                sc.w_diag[i] = std::sqrt(s[i] / z[i]);
                sc.lambda[i] = std::sqrt(s[i] * z[i]);
            }
        } else {
            const int d = blk.dim;
            Eigen::VectorXd sb = s.segment(blk.first, d);
            Eigen::VectorXd zb = z.segment(blk.first, d);
            const double aa = jnrm2(sb);
            const double bb = jnrm2(zb);
            sb /= aa;
            zb /= bb;
            const double cc = std::sqrt((1.0 + sb.dot(zb)) / 2.0);
            Eigen::VectorXd wbar(d);
            wbar[0] = (sb[0] + zb[0]) / (2.0 * cc);
            wbar.tail(d - 1) = (sb.tail(d - 1) - zb.tail(d - 1)) / (2.0 * cc);
            Eigen::VectorXd v = wbar;
            v[0] += 1.0;
            v /= std::sqrt(2.0 * (wbar[0] + 1.0));
            sc.soc_beta.push_back(std::sqrt(aa / bb));
            sc.soc_v.push_back(v);
            // lambda = sqrt(a*b) * [c; (c + zb0)/d * sb1 + (c + sb0)/d * zb1]
            const double dd = 2.0 * cc + sb[0] + zb[0];
            Eigen::VectorXd lam(d);
            lam[0] = cc;
            lam.tail(d - 1) = ((cc + zb[0]) / dd) * sb.tail(d - 1) +
                              ((cc + sb[0]) / dd) * zb.tail(d - 1);
            sc.lambda.segment(blk.first, d) = std::sqrt(aa * bb) * lam;
        }
    }
    sc.soc_w.resize(sc.soc_v.size());
    sc.soc_w2.resize(sc.soc_v.size());
    sc.rebuild_soc_mats();
    return sc;
}

Eigen::VectorXd mul_w(const Scaling& sc, const Eigen::VectorXd& v, bool inverse) {
    Eigen::VectorXd out(v.size());
    size_t soc_i = 0;
    for (const auto& blk : sc.blocks) {
        if (blk.type == ConeType::NonNeg) {
            for (int i = blk.first; i < blk.first + blk.dim; ++i)
                out[i] = inverse ? v[i] / sc.w_diag[i] : v[i] * sc.w_diag[i];
        } else {
            // W^{-1} = (1/beta) * J (2vv' - J) J.
            const auto& vv = sc.soc_v[soc_i];
            const double beta = sc.soc_beta[soc_i];
            ++soc_i;
            const int d = blk.dim;
            const auto x = v.segment(blk.first, d);
            if (!inverse) {
                const double vx = vv.dot(x);
                out.segment(blk.first, d) = beta * (2.0 * vx * vv);
                out[blk.first] -= beta * x[0];
                out.segment(blk.first + 1, d - 1) += beta * x.tail(d - 1);
            } else {
                Eigen::VectorXd jx = x;
                jx.tail(d - 1) *= -1.0;
                const double vjx = vv.dot(jx);
                Eigen::VectorXd t = 2.0 * vjx * vv;
                t[0] -= jx[0];
                t.tail(d - 1) += jx.tail(d - 1);
                t.tail(d - 1) *= -1.0;  // apply outer J
                out.segment(blk.first, d) = t / beta;
            }
        }
    }
    return out;
}

Eigen::VectorXd jordan_prod(const std::vector<Block>& blocks, const Eigen::VectorXd& u,
                            const Eigen::VectorXd& v) {
    Eigen::VectorXd out(u.size());
    for (const auto& blk : blocks) {
        if (blk.type == ConeType::NonNeg) {
            for (int i = blk.first; i < blk.first + blk.dim; ++i) out[i] = u[i] * v[i];
        } else {
            const int f = blk.first, d = blk.dim;
            out[f] = u.segment(f, d).dot(v.segment(f, d));
            out.segment(f + 1, d - 1) =
                u[f] * v.segment(f + 1, d - 1) + v[f] * u.segment(f + 1, d - 1);
        }
    }
    return out;
}

// Solves lambda o g = w.
Eigen::VectorXd jordan_div(const std::vector<Block>& blocks, const Eigen::VectorXd& lambda,
                           const Eigen::VectorXd& w) {
    Eigen::VectorXd out(w.size());
    for (const auto& blk : blocks) {
        if (blk.type == ConeType::NonNeg) {
            for (int i = blk.first; i < blk.first + blk.dim; ++i) out[i] = w[i] / lambda[i];
        } else {
            const int f = blk.first, d = blk.dim;
            const double l0 = lambda[f];
            const auto lbar = lambda.segment(f + 1, d - 1);
            const double det = l0 * l0 - lbar.squaredNorm();
            const double g0 = (l0 * w[f] - lbar.dot(w.segment(f + 1, d - 1))) / det;
            out[f] = g0;
            out.segment(f + 1, d - 1) = (w.segment(f + 1, d - 1) - g0 * lbar) / l0;
        }
    }
    return out;
}

Eigen::VectorXd cone_identity(const std::vector<Block>& blocks, int m) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
    for (const auto& blk : blocks) {
        if (blk.type == ConeType::NonNeg) {
            e.segment(blk.first, blk.dim).setOnes();
        } else {
            e[blk.first] = 1.0;
        }
    }
    return e;
}

// Congruence with the lambda point: maps the current iterate to the cone
// identity, so boundary distances become eigenvalue bounds.
Eigen::VectorXd scale2(const std::vector<Block>& blocks, const Eigen::VectorXd& lambda,
                       const Eigen::VectorXd& x, bool inverse) {
    Eigen::VectorXd out(x.size());
    for (const auto& blk : blocks) {
        if (blk.type == ConeType::NonNeg) {
            for (int i = blk.first; i < blk.first + blk.dim; ++i)
                out[i] = inverse ? x[i] * lambda[i] : x[i] / lambda[i];
        } else {
            const int f = blk.first, d = blk.dim;
            const double a = jnrm2(lambda.segment(f, d));
            Eigen::VectorXd l = lambda.segment(f, d) / a;
            const auto xb = x.segment(f, d);
            if (!inverse) {
                const double ljx = l[0] * xb[0] - l.tail(d - 1).dot(xb.tail(d - 1));
                out[f] = ljx / a;
                out.segment(f + 1, d - 1) =
                    (xb.tail(d - 1) - (xb[0] + ljx) / (l[0] + 1.0) * l.tail(d - 1)) / a;
            } else {
                const double lx = l.dot(xb);
                out[f] = a * lx;
                out.segment(f + 1, d - 1) =
                    a * (xb.tail(d - 1) + (xb[0] + lx) / (l[0] + 1.0) * l.tail(d - 1));
            }
        }
    }
    return out;
}

// Max of the negative part of the hat-space vector: the boundary is hit at
// step 1/t.
double max_step_hat(const std::vector<Block>& blocks, const Eigen::VectorXd& d) {
    double t = 0.0;
    for (const auto& blk : blocks) {
        if (blk.type == ConeType::NonNeg) {
            for (int i = blk.first; i < blk.first + blk.dim; ++i) t = std::max(t, -d[i]);
        } else {
            const int f = blk.first;
            t = std::max(t, d.segment(f + 1, blk.dim - 1).norm() - d[f]);
        }
    }
    return t;
}

// In-scaling update of (W, lambda) from the scaled updated variables st, zt
// (the hat-space points mapped back through scale2 inverse).
void update_scaling(Scaling& sc, const Eigen::VectorXd& st, const Eigen::VectorXd& zt) {
    size_t soc_i = 0;
    for (const auto& blk : sc.blocks) {
        if (blk.type == ConeType::NonNeg) {
            for (int i = blk.first; i < blk.first + blk.dim; ++i) {
                sc.w_diag[i] *= std::sqrt(st[i] / zt[i]);
                sc.lambda[i] = std::sqrt(st[i] * zt[i]);
            }
        } else {
            const int f = blk.first, d = blk.dim;
            Eigen::VectorXd sb = st.segment(f, d);
            Eigen::VectorXd zb = zt.segment(f, d);
            const double aa = jnrm2(sb);
            const double bb = jnrm2(zb);
            sb /= aa;
            zb /= bb;
            const double cc = std::sqrt((1.0 + sb.dot(zb)) / 2.0);
            Eigen::VectorXd& v = sc.soc_v[soc_i];
            const double vs = v.dot(sb);
            double vjz = v[0] * zb[0] - v.tail(d - 1).dot(zb.tail(d - 1));
            const double vq = (vs + vjz) / (2.0 * cc);
            const double vu = vs - vjz;
            const double wk0 = 2.0 * v[0] * vq - (sb[0] + zb[0]) / (2.0 * cc);
            const double dd = (v[0] * vu - sb[0] / 2.0 + zb[0] / 2.0) / (wk0 + 1.0);

            Eigen::VectorXd lam(d);
            lam[0] = cc;
            lam.tail(d - 1) = 2.0 * (-dd * vq + 0.5 * vu) * v.tail(d - 1);
            lam.tail(d - 1) += 0.5 * (1.0 - dd / cc) * sb.tail(d - 1);
            lam.tail(d - 1) += 0.5 * (1.0 + dd / cc) * zb.tail(d - 1);
            sc.lambda.segment(f, d) = std::sqrt(aa * bb) * lam;

            // v := ((2vv' - J) q)^{1/2} with q = (sb + J zb) / (2c).
            v *= 2.0 * vq;
            v[0] -= sb[0] / (2.0 * cc);
            v.tail(d - 1) += (0.5 / cc) * sb.tail(d - 1);
            v -= (0.5 / cc) * zb;
            v[0] += 1.0;
            v /= std::sqrt(2.0 * v[0]);

            sc.soc_beta[soc_i] *= std::sqrt(aa / bb);
            ++soc_i;
        }
    }
    sc.rebuild_soc_mats();
}

struct KktSystem {
    const Eigen::SparseMatrix<double>& A;
    const Eigen::SparseMatrix<double>& G;
    const Scaling* sc = nullptr;
    int n, p, m;
    double reg = 1e-11;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    bool analyzed = false;

    KktSystem(const Eigen::SparseMatrix<double>& A_, const Eigen::SparseMatrix<double>& G_)
        : A(A_), G(G_), n(static_cast<int>(A_.cols())), p(static_cast<int>(A_.rows())),
          m(static_cast<int>(G_.rows())) {}

    void factorize(const Scaling& scaling) {
        sc = &scaling;
        const int N = n + p + m;
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(static_cast<size_t>(2 * (A.nonZeros() + G.nonZeros())) + N +
                      16 * scaling.blocks.size());
        for (int k = 0; k < A.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
                trips.emplace_back(n + static_cast<int>(it.row()), static_cast<int>(it.col()),
                                   it.value());
                trips.emplace_back(static_cast<int>(it.col()), n + static_cast<int>(it.row()),
                                   it.value());
            }
        for (int k = 0; k < G.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(G, k); it; ++it) {
                trips.emplace_back(n + p + static_cast<int>(it.row()), static_cast<int>(it.col()),
                                   it.value());
                trips.emplace_back(static_cast<int>(it.col()), n + p + static_cast<int>(it.row()),
                                   it.value());
            }
        size_t soc_i = 0;
        for (const auto& blk : scaling.blocks) {
            if (blk.type == ConeType::NonNeg) {
                for (int i = blk.first; i < blk.first + blk.dim; ++i)
                    trips.emplace_back(n + p + i, n + p + i,
                                       -scaling.w_diag[i] * scaling.w_diag[i]);
            } else {
                const Eigen::MatrixXd& W2 = scaling.soc_w2[soc_i++];
                for (int r = 0; r < blk.dim; ++r)
                    for (int c2 = 0; c2 < blk.dim; ++c2)
                        trips.emplace_back(n + p + blk.first + r, n + p + blk.first + c2,
                                           -W2(r, c2));
            }
        }
        for (int i = 0; i < n; ++i) trips.emplace_back(i, i, reg);
        for (int i = n; i < N; ++i) trips.emplace_back(i, i, -reg);

        Eigen::SparseMatrix<double> K(N, N);
        K.setFromTriplets(trips.begin(), trips.end());
        if (!analyzed) {
            ldlt.analyzePattern(K);
            analyzed = true;
        }
        ldlt.factorize(K);
        if (ldlt.info() != Eigen::Success) {
            if (reg > 1e-2) throw SolverError("kkt factorization failed despite regularization");
            reg *= 1e3;
            analyzed = false;
            factorize(scaling);
        }
    }

    Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
        Eigen::VectorXd out(n + p + m);
        const auto vx = v.head(n);
        const auto vy = v.segment(n, p);
        const auto vz = v.tail(m);
        out.head(n) = A.transpose() * vy + G.transpose() * vz;
        out.segment(n, p) = A * vx;
        out.tail(m) = G * vx - mul_w(*sc, mul_w(*sc, vz, false), false);
        return out;
    }

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
        Eigen::VectorXd u = ldlt.solve(rhs);
        for (int it = 0; it < 2; ++it) {
            Eigen::VectorXd r = rhs - apply(u);
            u += ldlt.solve(r);
        }
        return u;
    }
};

void shift_interior(const std::vector<Block>& blocks, Eigen::VectorXd& v) {
    double t = -kInf;
    for (const auto& blk : blocks) {
        if (blk.type == ConeType::NonNeg) {
            for (int i = blk.first; i < blk.first + blk.dim; ++i) t = std::max(t, -v[i]);
        } else {
            const int f = blk.first, d = blk.dim;
            t = std::max(t, v.segment(f + 1, d - 1).norm() - v[f]);
        }
    }
    const double nrm = v.size() ? v.norm() : 0.0;
    if (t >= -1e-8 * std::max(nrm, 1.0)) {
        const double a = 1.0 + t;
        for (const auto& blk : blocks) {
            if (blk.type == ConeType::NonNeg) {
                for (int i = blk.first; i < blk.first + blk.dim; ++i) v[i] += a;
            } else {
                v[blk.first] += a;
            }
        }
    }
}

struct PresolveResult {
    Eigen::SparseMatrix<double> A;
    Eigen::VectorXd b;
    std::vector<int> kept;
    std::vector<int> dropped;
};

PresolveResult presolve_eq(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b,
                           bool enabled) {
    PresolveResult out{A, b, {}, {}};
    const int p = static_cast<int>(A.rows());
    out.kept.resize(p);
    for (int i = 0; i < p; ++i) out.kept[i] = i;
    if (!enabled || p == 0) return out;

    Eigen::SparseMatrix<double> At = A.transpose();
    At.makeCompressed();
    Eigen::SparseQR<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> qr;
    qr.compute(At);
    const int rank = static_cast<int>(qr.rank());
    if (rank >= p) return out;

    const auto& perm = qr.colsPermutation().indices();
    std::vector<bool> keep(p, false);
    for (int i = 0; i < rank; ++i) keep[perm[i]] = true;
    out.kept.clear();
    for (int i = 0; i < p; ++i) (keep[i] ? out.kept : out.dropped).push_back(i);

    Eigen::SparseMatrix<double> Ak(rank, A.cols());
    std::vector<Eigen::Triplet<double>> trips;
    Eigen::VectorXd bk(rank);
    for (int newr = 0; newr < rank; ++newr) {
        const int orig = out.kept[newr];
        for (Eigen::SparseMatrix<double>::InnerIterator it(At, orig); it; ++it)
            trips.emplace_back(newr, static_cast<int>(it.row()), it.value());
        bk[newr] = b[orig];
    }
    Ak.setFromTriplets(trips.begin(), trips.end());
    out.A = std::move(Ak);
    out.b = std::move(bk);
    return out;
}

}  // namespace

ConicSolution solve(const ConicProblem& prob, const Tolerances& tol) {
    const int n = prob.num_vars();
    const int m = prob.num_cone_rows();

    Eigen::VectorXd c = prob.cost_vector();
    Eigen::SparseMatrix<double> A_full = prob.eq_matrix();
    Eigen::VectorXd b_full = prob.eq_rhs();
    Eigen::SparseMatrix<double> G = prob.cone_matrix();
    Eigen::VectorXd h = prob.cone_rhs();

    std::vector<Block> blocks;
    blocks.reserve(prob.cones().size());
    std::vector<int> rsoc_firsts;
    for (const auto& cb : prob.cones()) {
        blocks.push_back({cb.type == ConeType::NonNeg ? ConeType::NonNeg : ConeType::Soc,
                          cb.first_row, cb.dim});
        if (cb.type == ConeType::RSoc) rsoc_firsts.push_back(cb.first_row);
    }
    if (!rsoc_firsts.empty()) {
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(static_cast<size_t>(G.nonZeros()) * 2);
        std::vector<int> rot(m, -1);
        for (int f : rsoc_firsts) {
            rot[f] = f;
            rot[f + 1] = f;
        }
        const double s2 = std::sqrt(0.5);
        std::vector<std::vector<std::pair<int, double>>> rows(m);
        for (int k = 0; k < G.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(G, k); it; ++it)
                rows[it.row()].emplace_back(static_cast<int>(it.col()), it.value());
        for (int r = 0; r < m; ++r) {
            if (rot[r] == -1)
                for (auto [col, val] : rows[r]) trips.emplace_back(r, col, val);
        }
        for (int f : rsoc_firsts) {
            std::map<int, std::pair<double, double>> merged;
            for (auto [col, val] : rows[f]) merged[col].first = val;
            for (auto [col, val] : rows[f + 1]) merged[col].second = val;
            for (auto& [col, v] : merged) {
                const double a = v.first, bv = v.second;
                const double top = s2 * (a + bv), bot = s2 * (a - bv);
                if (top != 0.0) trips.emplace_back(f, col, top);
                if (bot != 0.0) trips.emplace_back(f + 1, col, bot);
            }
            rotate_rsoc_pair(h, f);
        }
        Eigen::SparseMatrix<double> Grot(m, n);
        Grot.setFromTriplets(trips.begin(), trips.end());
        G = std::move(Grot);
    }

    PresolveResult pre = presolve_eq(A_full, b_full, tol.presolve);
    const Eigen::SparseMatrix<double>& A = pre.A;
    const Eigen::VectorXd& b = pre.b;
    const int p = static_cast<int>(A.rows());

    ConicSolution sol;
    sol.dropped_eq_rows = pre.dropped;
    if (!pre.dropped.empty()) {
        sol.message = "presolve dropped " + std::to_string(pre.dropped.size()) +
                      " dependent equality row(s): ";
        for (size_t i = 0; i < pre.dropped.size() && i < 4; ++i)
            sol.message += prob.eq_label(pre.dropped[i]) + " ";
    }

    KktSystem kkt(A, G);

    // Starting point from identity-scaled least-squares solves.
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd s = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(m);
    double tau = 1.0, kappa = 1.0;
    {
        Scaling ident;
        ident.blocks = blocks;
        ident.w_diag = Eigen::VectorXd::Ones(m);
        ident.lambda = Eigen::VectorXd::Zero(m);
        for (const auto& blk : blocks) {
            if (blk.type == ConeType::Soc) {
                Eigen::VectorXd v = Eigen::VectorXd::Zero(blk.dim);
                v[0] = 1.0;
                ident.soc_beta.push_back(1.0);
                ident.soc_v.push_back(v);
            }
        }
        ident.soc_w.resize(ident.soc_v.size());
        ident.soc_w2.resize(ident.soc_v.size());
        ident.rebuild_soc_mats();
        kkt.factorize(ident);
        Eigen::VectorXd rhs(n + p + m);
        rhs.setZero();
        if (p > 0) rhs.segment(n, p) = b;
        if (m > 0) rhs.tail(m) = h;
        Eigen::VectorXd u = kkt.solve(rhs);
        x = u.head(n);
        if (m > 0) {
            s = -u.tail(m);
            shift_interior(blocks, s);
        }
        rhs.setZero();
        rhs.head(n) = -c;
        u = kkt.solve(rhs);
        if (p > 0) y = u.segment(n, p);
        if (m > 0) {
            z = u.tail(m);
            shift_interior(blocks, z);
        }
    }
    Scaling sc = m > 0 ? compute_scaling(blocks, s, z) : Scaling{};
    if (m == 0) {
        sc.blocks = blocks;
        sc.w_diag = Eigen::VectorXd::Zero(0);
        sc.lambda = Eigen::VectorXd::Zero(0);
    }

    const double resx0 = std::max(1.0, c.norm());
    const double resy0 = std::max(1.0, p > 0 ? b.norm() : 0.0);
    const double resz0 = std::max(1.0, m > 0 ? h.norm() : 0.0);

    struct Snapshot {
        Eigen::VectorXd x, y, s, z;
        double tau = 1.0, kappa = 1.0;
        double score = kInf;
    } best;
    int stall = 0;

    auto finalize = [&](SolveStatus status) {
        sol.status = status;
        const double t = std::max(tau, 1e-300);
        sol.x = x / t;
        sol.y = p > 0 ? Eigen::VectorXd(-y / t) : Eigen::VectorXd(0);
        sol.s = s / t;
        sol.z = z / t;
        sol.objective = c.dot(sol.x);
        sol.gap = std::abs(sol.s.dot(sol.z)) / (1.0 + std::abs(sol.objective));
        double pres = 0.0;
        if (p > 0) pres = (A * sol.x - b).lpNorm<Eigen::Infinity>();
        if (m > 0) pres = std::max(pres, (G * sol.x + sol.s - h).lpNorm<Eigen::Infinity>());
        sol.primal_residual = pres;
        Eigen::VectorXd dres = c;
        if (p > 0) dres -= A.transpose() * sol.y;  // exposed y = -internal y
        if (m > 0) dres += G.transpose() * sol.z;
        sol.dual_residual = dres.lpNorm<Eigen::Infinity>();

        for (int f : rsoc_firsts) {
            rotate_rsoc_pair(sol.s, f);
            rotate_rsoc_pair(sol.z, f);
        }
        if (!pre.dropped.empty() || p != prob.num_eq_rows()) {
            Eigen::VectorXd yfull = Eigen::VectorXd::Zero(prob.num_eq_rows());
            for (int i = 0; i < p; ++i) yfull[pre.kept[i]] = sol.y[i];
            sol.y = yfull;
        }
        return sol;
    };

    for (int iter = 0; iter <= tol.max_iters; ++iter) {
        sol.iterations = iter;

        Eigen::VectorXd hrx = Eigen::VectorXd::Zero(n);
        if (p > 0) hrx -= A.transpose() * y;
        if (m > 0) hrx -= G.transpose() * z;
        Eigen::VectorXd rx = hrx - c * tau;
        Eigen::VectorXd hry = p > 0 ? Eigen::VectorXd(A * x) : Eigen::VectorXd(0);
        Eigen::VectorXd ry = p > 0 ? Eigen::VectorXd(hry - b * tau) : Eigen::VectorXd(0);
        Eigen::VectorXd hrz = m > 0 ? Eigen::VectorXd(s + G * x) : Eigen::VectorXd(0);
        Eigen::VectorXd rz = m > 0 ? Eigen::VectorXd(hrz - h * tau) : Eigen::VectorXd(0);
        const double cx = c.dot(x);
        const double by = p > 0 ? b.dot(y) : 0.0;
        const double hz = m > 0 ? h.dot(z) : 0.0;
        const double rt = kappa + cx + by + hz;

        const double resx = rx.norm() / tau;
        const double resy = p > 0 ? ry.norm() / tau : 0.0;
        const double resz = m > 0 ? rz.norm() / tau : 0.0;
        const double pcost = cx / tau;
        const double dcost = -(by + hz) / tau;
        const double gap = s.dot(z) / (tau * tau);
        double relgap = kInf;
        if (pcost < 0.0)
            relgap = gap / (-pcost);
        else if (dcost > 0.0)
            relgap = gap / dcost;
        const double pres = std::max(resy / resy0, resz / resz0);
        const double dres = resx / resx0;

        if (tol.verbose)
            std::fprintf(stderr,
                         "it %3d pcost % 9.3e gap %8.1e pres %8.1e dres %8.1e k/t %8.1e\n", iter,
                         pcost, gap, pres, dres, kappa / tau);

        if (pres <= tol.feas && dres <= tol.feas && (gap <= tol.gap || relgap <= tol.gap))
            return finalize(SolveStatus::Optimal);

        if (by + hz < 0.0 && hrx.norm() / resx0 / (-by - hz) <= tol.feas) {
            sol.message += "primal infeasibility certificate found";
            const double scale = -(by + hz);
            tau = 1.0;
            y /= scale;
            z /= scale;
            x.setZero();
            s.setZero();
            return finalize(SolveStatus::Infeasible);
        }
        if (cx < 0.0) {
            const double dinf = std::max(p > 0 ? hry.norm() / resy0 : 0.0,
                                         m > 0 ? hrz.norm() / resz0 : 0.0) /
                                (-cx);
            if (dinf <= tol.feas) {
                sol.message += "dual infeasibility certificate found (unbounded primal)";
                tau = 1.0;
                x /= -cx;
                s /= -cx;
                y.setZero();
                z.setZero();
                return finalize(SolveStatus::Unbounded);
            }
        }

        const double score = std::max({pres, dres, std::min(gap, relgap)});
        if (score < 0.9 * best.score) {
            best = Snapshot{x, y, s, z, tau, kappa, score};
            stall = 0;
        } else if (++stall > 20) {
            break;
        }
        if (iter == tol.max_iters) break;

        const double dg = std::sqrt(kappa / tau);
        const double dgi = 1.0 / dg;
        const double lambda_g = std::sqrt(tau * kappa);
        const double mu =
            (sc.lambda.squaredNorm() + lambda_g * lambda_g) / (1.0 + static_cast<double>(m));

        kkt.factorize(sc);

        Eigen::VectorXd rhs1(n + p + m);
        rhs1.head(n) = -c;
        if (p > 0) rhs1.segment(n, p) = b;
        if (m > 0) rhs1.tail(m) = h;
        Eigen::VectorXd u1 = kkt.solve(rhs1);
        Eigen::VectorXd z1hat =
            m > 0 ? Eigen::VectorXd(dgi * mul_w(sc, u1.tail(m), false)) : Eigen::VectorXd(0);
        const double den = 1.0 + z1hat.squaredNorm();

        struct Dir {
            Eigen::VectorXd dx, dy, dz, ds;
            double dtau = 0.0, dkappa = 0.0;
        };
        auto solve_newton = [&](const Eigen::VectorXd& bx, const Eigen::VectorXd& byv,
                                const Eigen::VectorXd& bz, double btau, const Eigen::VectorXd& bs,
                                double bk) {
            Dir d;
            Eigen::VectorXd wdiv;  // W * (lambda \ bs)
            Eigen::VectorXd rhs2(n + p + m);
            rhs2.head(n) = bx;
            if (p > 0) rhs2.segment(n, p) = byv;
            if (m > 0) {
                wdiv = mul_w(sc, jordan_div(blocks, sc.lambda, bs), false);
                rhs2.tail(m) = bz - wdiv;
            }
            Eigen::VectorXd u2 = kkt.solve(rhs2);
            const double dot_u2 = c.dot(u2.head(n)) + (p > 0 ? b.dot(u2.segment(n, p)) : 0.0) +
                                  (m > 0 ? h.dot(u2.tail(m)) : 0.0);
            d.dtau = dgi * dgi * (-btau + bk / tau + dot_u2) / den;
            d.dx = u2.head(n) + d.dtau * u1.head(n);
            d.dy = p > 0 ? Eigen::VectorXd(u2.segment(n, p) + d.dtau * u1.segment(n, p))
                         : Eigen::VectorXd(0);
            d.dz = m > 0 ? Eigen::VectorXd(u2.tail(m) + d.dtau * u1.tail(m)) : Eigen::VectorXd(0);
            d.ds = m > 0
                       ? Eigen::VectorXd(wdiv - mul_w(sc, mul_w(sc, d.dz, false), false))
                       : Eigen::VectorXd(0);
            d.dkappa = (bk - kappa * d.dtau) / tau;
            return d;
        };
        auto direction = [&](const Eigen::VectorXd& bx, const Eigen::VectorXd& byv,
                             const Eigen::VectorXd& bz, double btau, const Eigen::VectorXd& bs,
                             double bk) {
            Dir d = solve_newton(bx, byv, bz, btau, bs, bk);
            for (int r = 0; r < 2; ++r) {
                Eigen::VectorXd e1 = bx - c * d.dtau;
                if (p > 0) e1 -= A.transpose() * d.dy;
                if (m > 0) e1 -= G.transpose() * d.dz;
                Eigen::VectorXd e2 =
                    p > 0 ? Eigen::VectorXd(byv - A * d.dx + b * d.dtau) : Eigen::VectorXd(0);
                Eigen::VectorXd e3 = m > 0
                                         ? Eigen::VectorXd(bz - G * d.dx - d.ds + h * d.dtau)
                                         : Eigen::VectorXd(0);
                const double e4 = btau - c.dot(d.dx) - (p > 0 ? b.dot(d.dy) : 0.0) -
                                  (m > 0 ? h.dot(d.dz) : 0.0) - d.dkappa;
                Eigen::VectorXd e5 =
                    m > 0 ? Eigen::VectorXd(bs - jordan_prod(blocks, sc.lambda,
                                                             mul_w(sc, d.dz, false) +
                                                                 mul_w(sc, d.ds, true)))
                          : Eigen::VectorXd(0);
                const double e6 = bk - tau * d.dkappa - kappa * d.dtau;
                Dir corr = solve_newton(e1, e2, e3, e4, e5, e6);
                d.dx += corr.dx;
                if (p > 0) d.dy += corr.dy;
                if (m > 0) {
                    d.dz += corr.dz;
                    d.ds += corr.ds;
                }
                d.dtau += corr.dtau;
                d.dkappa += corr.dkappa;
            }
            return d;
        };

        Eigen::VectorXd lsq =
            m > 0 ? Eigen::VectorXd(jordan_prod(blocks, sc.lambda, sc.lambda)) : Eigen::VectorXd(0);
        Dir aff = direction(rx, p > 0 ? Eigen::VectorXd(-ry) : Eigen::VectorXd(0),
                            m > 0 ? Eigen::VectorXd(-rz) : Eigen::VectorXd(0), -rt,
                            m > 0 ? Eigen::VectorXd(-lsq) : Eigen::VectorXd(0),
                            -lambda_g * lambda_g);

        // Steps are measured in the lambda-hat space where the iterate is e.
        Eigen::VectorXd ds_hat_aff, dz_hat_aff;
        double t_aff = 0.0;
        if (m > 0) {
            ds_hat_aff = scale2(blocks, sc.lambda, mul_w(sc, aff.ds, true), false);
            dz_hat_aff = scale2(blocks, sc.lambda, mul_w(sc, aff.dz, false), false);
            t_aff = std::max(max_step_hat(blocks, ds_hat_aff), max_step_hat(blocks, dz_hat_aff));
        }
        t_aff = std::max(t_aff, -aff.dtau / tau);
        t_aff = std::max(t_aff, -aff.dkappa / kappa);
        const double step_aff = t_aff <= 0.0 ? 1.0 : std::min(1.0, 1.0 / t_aff);
        const double sigma = std::pow(1.0 - step_aff, 3.0);

        Eigen::VectorXd bs = m > 0 ? Eigen::VectorXd(-lsq) : Eigen::VectorXd(0);
        if (m > 0) {
            Eigen::VectorXd qs = mul_w(sc, aff.ds, true);
            Eigen::VectorXd qz = mul_w(sc, aff.dz, false);
            bs -= jordan_prod(blocks, qs, qz);
            bs += sigma * mu * cone_identity(blocks, m);
        }
        const double bk = -(lambda_g * lambda_g + aff.dtau * aff.dkappa - sigma * mu);
        Dir comb = direction((1.0 - sigma) * rx,
                             p > 0 ? Eigen::VectorXd(-(1.0 - sigma) * ry) : Eigen::VectorXd(0),
                             m > 0 ? Eigen::VectorXd(-(1.0 - sigma) * rz) : Eigen::VectorXd(0),
                             -(1.0 - sigma) * rt, bs, bk);

        Eigen::VectorXd ds_hat, dz_hat;
        double t_comb = 0.0;
        if (m > 0) {
            ds_hat = scale2(blocks, sc.lambda, mul_w(sc, comb.ds, true), false);
            dz_hat = scale2(blocks, sc.lambda, mul_w(sc, comb.dz, false), false);
            t_comb = std::max(max_step_hat(blocks, ds_hat), max_step_hat(blocks, dz_hat));
        }
        t_comb = std::max(t_comb, -comb.dtau / tau);
        t_comb = std::max(t_comb, -comb.dkappa / kappa);
        const double step = t_comb <= 0.0 ? 1.0 : std::min(1.0, 0.99 / t_comb);

        if (tol.verbose)
            std::fprintf(stderr, "      sigma %8.1e step_aff %8.1e step %8.1e dtau %9.2e\n", sigma,
                         step_aff, step, comb.dtau);
        if (!(step > 1e-14)) {
            sol.message += " step collapsed";
            break;
        }

        x += step * comb.dx;
        if (p > 0) y += step * comb.dy;
        tau += step * comb.dtau;
        kappa += step * comb.dkappa;
        if (!(tau > 0.0) || !(kappa > 0.0)) {
            sol.message += " embedding variables collapsed";
            break;
        }
        if (m > 0) {
            // Updated variables in hat space, then in the old scaling; the
            // scaling update keeps lambda consistent without cancellation.
            Eigen::VectorXd e = cone_identity(blocks, m);
            Eigen::VectorXd st =
                scale2(blocks, sc.lambda, Eigen::VectorXd(e + step * ds_hat), true);
            Eigen::VectorXd zt =
                scale2(blocks, sc.lambda, Eigen::VectorXd(e + step * dz_hat), true);
            update_scaling(sc, st, zt);
            // Reconstruct the unscaled iterate from the new scaling.
            s = mul_w(sc, sc.lambda, false);
            z = mul_w(sc, sc.lambda, true);
        }
    }

    if (best.score < kInf) {
        x = best.x;
        y = best.y;
        s = best.s;
        z = best.z;
        tau = best.tau;
        kappa = best.kappa;
        const double pres2 = std::max(
            p > 0 ? (A * x - b * tau).norm() / tau / resy0 : 0.0,
            m > 0 ? (G * x + s - h * tau).norm() / tau / resz0 : 0.0);
        Eigen::VectorXd rx2 = c * tau;
        if (p > 0) rx2 += A.transpose() * y;
        if (m > 0) rx2 += G.transpose() * z;
        const double dres2 = rx2.norm() / tau / resx0;
        const double gap2 = s.dot(z) / (tau * tau);
        const double pc2 = c.dot(x) / tau;
        const double dc2 = -((p > 0 ? b.dot(y) : 0.0) + (m > 0 ? h.dot(z) : 0.0)) / tau;
        double relgap2 = kInf;
        if (pc2 < 0.0)
            relgap2 = gap2 / (-pc2);
        else if (dc2 > 0.0)
            relgap2 = gap2 / dc2;
        if (pres2 <= tol.feas && dres2 <= tol.feas && (gap2 <= tol.gap || relgap2 <= tol.gap))
            return finalize(SolveStatus::Optimal);
    }
    sol.message += " max iterations reached";
    return finalize(SolveStatus::MaxIterations);
}

}  // namespace evgrid
