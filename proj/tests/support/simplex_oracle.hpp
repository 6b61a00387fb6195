#pragma once

// Test-only dense two-phase simplex, independent of the conic solver. Solves
//   min c'x  s.t.  A_eq x = b_eq,  A_le x <= b_le,  0 <= x <= ub
// with Bland's rule. Small and slow on purpose; used as a correctness oracle.

#include <Eigen/Dense>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace oracle {

struct LpResult {
    bool feasible = false;
    double objective = 0.0;
    Eigen::VectorXd x;
};

class Simplex {
  public:
    static LpResult solve(const Eigen::VectorXd& c, const Eigen::MatrixXd& Aeq,
                          const Eigen::VectorXd& beq, const Eigen::MatrixXd& Ale,
                          const Eigen::VectorXd& ble, const Eigen::VectorXd& ub) {
        const int n = static_cast<int>(c.size());
        const int meq = static_cast<int>(beq.size());
        const int mle = static_cast<int>(ble.size());
        // Standard form: x, slack per <= row, slack per upper bound.
        int nub = 0;
        std::vector<int> ub_rows(n, -1);
        for (int i = 0; i < n; ++i)
            if (std::isfinite(ub[i])) ub_rows[i] = nub++;
        const int ns = n + mle + nub;
        const int ms = meq + mle + nub;
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(ms, ns);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(ms);
        Eigen::VectorXd cost = Eigen::VectorXd::Zero(ns);
        cost.head(n) = c;
        if (meq > 0) {
            A.topLeftCorner(meq, n) = Aeq;
            b.head(meq) = beq;
        }
        for (int r = 0; r < mle; ++r) {
            A.row(meq + r).head(n) = Ale.row(r);
            A(meq + r, n + r) = 1.0;
            b(meq + r) = ble(r);
        }
        for (int i = 0; i < n; ++i) {
            if (ub_rows[i] < 0) continue;
            const int r = meq + mle + ub_rows[i];
            A(r, i) = 1.0;
            A(r, n + mle + ub_rows[i]) = 1.0;
            b(r) = ub(i);
        }
        for (int r = 0; r < ms; ++r) {
            if (b(r) < 0.0) {
                A.row(r) *= -1.0;
                b(r) *= -1.0;
            }
        }
        return standard_form(cost, A, b, n);
    }

  private:
    static LpResult standard_form(const Eigen::VectorXd& c, Eigen::MatrixXd A, Eigen::VectorXd b,
                                  int report_vars) {
        const int m = static_cast<int>(A.rows());
        const int n = static_cast<int>(A.cols());
        // Phase 1 with artificial variables.
        Eigen::MatrixXd T(m + 1, n + m + 1);
        T.setZero();
        T.block(0, 0, m, n) = A;
        T.block(0, n, m, m) = Eigen::MatrixXd::Identity(m, m);
        T.block(0, n + m, m, 1) = b;
        std::vector<int> basis(m);
        for (int r = 0; r < m; ++r) basis[r] = n + r;
        for (int j = 0; j < n; ++j) T(m, j) = -A.col(j).sum();
        T(m, n + m) = -b.sum();

        if (!iterate(T, basis, n + m)) return {};
        if (T(m, n + m) < -1e-7) return {};  // infeasible
        // Drive artificials out of the basis if still present.
        for (int r = 0; r < m; ++r) {
            if (basis[r] < n) continue;
            int enter = -1;
            for (int j = 0; j < n; ++j)
                if (std::abs(T(r, j)) > 1e-9) {
                    enter = j;
                    break;
                }
            if (enter >= 0) pivot(T, basis, r, enter);
        }
        // Phase 2.
        Eigen::MatrixXd T2(m + 1, n + 1);
        T2.block(0, 0, m, n) = T.block(0, 0, m, n);
        T2.block(0, n, m, 1) = T.block(0, n + m, m, 1);
        T2.row(m).setZero();
        for (int j = 0; j < n; ++j) T2(m, j) = c(j);
        for (int r = 0; r < m; ++r) {
            if (basis[r] < n && std::abs(c(basis[r])) > 0.0) T2.row(m) -= c(basis[r]) * T2.row(r);
        }
        if (!iterate(T2, basis, n)) {
            LpResult unb;
            unb.feasible = true;
            unb.objective = -std::numeric_limits<double>::infinity();
            return unb;
        }
        LpResult res;
        res.feasible = true;
        res.x = Eigen::VectorXd::Zero(report_vars);
        for (int r = 0; r < m; ++r)
            if (basis[r] < report_vars) res.x(basis[r]) = T2(r, n);
        res.objective = -T2(m, n);
        // objective row holds -(z - c_B B^-1 b); recompute directly for clarity
        double obj = 0.0;
        for (int r = 0; r < m; ++r)
            if (basis[r] < static_cast<int>(c.size())) obj += c(basis[r]) * T2(r, n);
        res.objective = obj;
        return res;
    }

    // Returns false on unboundedness (phase 2) or internal failure.
    static bool iterate(Eigen::MatrixXd& T, std::vector<int>& basis, int ncols) {
        const int m = static_cast<int>(T.rows()) - 1;
        const int rhs = static_cast<int>(T.cols()) - 1;
        for (int guard = 0; guard < 20000; ++guard) {
            int enter = -1;  // Bland: first negative reduced cost
            for (int j = 0; j < ncols; ++j)
                if (T(m, j) < -1e-9) {
                    enter = j;
                    break;
                }
            if (enter < 0) return true;
            int leave = -1;
            double best = std::numeric_limits<double>::infinity();
            for (int r = 0; r < m; ++r) {
                if (T(r, enter) > 1e-9) {
                    const double ratio = T(r, rhs) / T(r, enter);
                    if (ratio < best - 1e-12 ||
                        (ratio < best + 1e-12 && (leave < 0 || basis[r] < basis[leave]))) {
                        best = ratio;
                        leave = r;
                    }
                }
            }
            if (leave < 0) return false;  // unbounded
            pivot(T, basis, leave, enter);
        }
        throw std::runtime_error("simplex oracle: iteration guard tripped");
    }

    static void pivot(Eigen::MatrixXd& T, std::vector<int>& basis, int row, int col) {
        T.row(row) /= T(row, col);
        for (int r = 0; r < T.rows(); ++r) {
            if (r == row) continue;
            const double f = T(r, col);
            if (f != 0.0) T.row(r) -= f * T.row(row);
        }
        basis[row] = col;
    }
};

}  // namespace oracle
