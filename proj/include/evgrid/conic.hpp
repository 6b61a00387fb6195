#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <string>
#include <vector>

namespace evgrid {

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Linear expression sum_i coef_i * x_i + constant.
struct LinExpr {
    std::vector<std::pair<int, double>> terms;
    double constant = 0.0;

    LinExpr() = default;
    explicit LinExpr(double c) : constant(c) {}
    LinExpr& add(int var, double coef) {
        terms.emplace_back(var, coef);
        return *this;
    }
};

enum class ConeType { NonNeg, Soc, RSoc };

struct ConeBlock {
    ConeType type;
    int dim;
    int first_row;  // index into the cone-row range
};

// Conic program in standard form:
//
//   min c'x   s.t.   A_eq x = b_eq                     (equality rows)
//                    s = b_k - A_k x,  s in K_k        (cone rows, in block order)
//
// Cone rows are entered through expressions: add_soc({e1,..,ed}) constrains the
// vector (e1(x),..,ed(x)) to the second-order cone, and analogously for the
// other cone types. Binary-flagged variables are relaxed to [0,1] here and
// committed by solve_with_binaries.
class ConicProblem {
  public:
    int add_var(const std::string& name, double cost = 0.0);
    void set_cost(int var, double cost);
    void add_cost(int var, double cost);
    void mark_binary(int var);

    // expr(x) = 0. Returns the equality-row index.
    int add_eq(const std::string& label, const LinExpr& expr);
    // expr(x) >= 0 as a one-dimensional nonnegative block. Returns cone-row index.
    int add_nonneg(const std::string& label, const LinExpr& expr);
    // (e1,..,ed) in SOC: e1 >= ||(e2..ed)||. Returns first cone-row index.
    int add_soc(const std::string& label, const std::vector<LinExpr>& exprs);
    // (e1,..,ed) in RSOC: 2 e1 e2 >= sum_{i>=3} e_i^2, e1,e2 >= 0.
    int add_rsoc(const std::string& label, const std::vector<LinExpr>& exprs);
    // lo <= x_v <= hi sugar (two nonnegative rows; infinities skip a side).
    void add_box(int var, double lo, double hi);

    int num_vars() const { return static_cast<int>(costs_.size()); }
    int num_eq_rows() const { return static_cast<int>(eq_rhs_.size()); }
    int num_cone_rows() const { return static_cast<int>(cone_rhs_.size()); }
    const std::vector<ConeBlock>& cones() const { return cones_; }
    const std::vector<int>& binary_vars() const { return binaries_; }
    const std::string& var_name(int v) const { return var_names_[v]; }
    const std::string& eq_label(int r) const { return eq_labels_[r]; }
    const std::string& cone_label(int r) const { return cone_labels_[r]; }
    int var_index(const std::string& name) const;  // -1 when absent

    Eigen::VectorXd cost_vector() const;
    Eigen::SparseMatrix<double> eq_matrix() const;
    Eigen::VectorXd eq_rhs() const;
    Eigen::SparseMatrix<double> cone_matrix() const;
    Eigen::VectorXd cone_rhs() const;

    // Pins a variable to a value by appending an equality row.
    void fix_var(int var, double value);

    // Text dump/load: triplet rows plus the cone list; see docs/formats.md.
    std::string dump() const;
    static ConicProblem parse_dump(const std::string& text);

  private:
    friend class ConicProblemAccess;
    std::vector<double> costs_;
    std::vector<std::string> var_names_;
    std::vector<int> binaries_;

    std::vector<Eigen::Triplet<double>> eq_triplets_;
    std::vector<double> eq_rhs_;
    std::vector<std::string> eq_labels_;

    std::vector<Eigen::Triplet<double>> cone_triplets_;
    std::vector<double> cone_rhs_;
    std::vector<std::string> cone_labels_;
    std::vector<ConeBlock> cones_;

    int push_cone_row(const std::string& label, const LinExpr& expr);
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, MaxIterations };

std::string to_string(SolveStatus s);

struct Tolerances {
    double feas = 1e-8;
    double gap = 1e-8;
    int max_iters = 200;
    bool presolve = true;   // drop dependent equality rows (QR-based)
    bool verbose = false;
};

// Solution conventions:
//  - y holds one multiplier per equality row with the sensitivity sign
//    y_r = d(objective)/d(b_eq_r).
//  - s and z are the cone slack and its dual (z in the dual cone); the
//    sensitivity of the objective to a cone-row rhs is -z_r. RSOC blocks are
//    solved internally in SOC coordinates through the orthogonal 2x2 rotation
//    [s1;s2] -> [(s1+s2)/sqrt2; (s1-s2)/sqrt2] and mapped back, so the
//    returned s,z satisfy the rotated-cone membership 2 s1 s2 >= ||s3..||^2.
struct ConicSolution {
    SolveStatus status = SolveStatus::MaxIterations;
    Eigen::VectorXd x;
    Eigen::VectorXd y;
    Eigen::VectorXd s;
    Eigen::VectorXd z;
    double objective = 0.0;
    double gap = 0.0;             // |s'z| / (1 + |objective|)
    double primal_residual = 0.0; // ||A x - b||_inf over both row groups
    double dual_residual = 0.0;
    int iterations = 0;
    std::vector<int> dropped_eq_rows;  // removed by presolve (duals set to 0)
    std::string message;
};

ConicSolution solve(const ConicProblem& p, const Tolerances& tol = {});

struct BinarySolveResult {
    ConicSolution solution;           // convex resolve with binaries fixed
    std::vector<double> committed;    // one value in {0,1} per binary var
    bool used_branch_bound = false;
    bool node_limit_hit = false;
    int nodes_explored = 0;
};

enum class BinaryStrategy { RelaxRoundResolve, BranchBound };

// Commits binary-flagged variables: solves the relaxation, rounds, and
// re-solves the convex restriction so the returned duals price the committed
// system. Rounding that turns infeasible falls back to best-first
// branch-and-bound up to node_limit.
BinarySolveResult solve_with_binaries(const ConicProblem& p,
                                      BinaryStrategy strategy = BinaryStrategy::RelaxRoundResolve,
                                      int node_limit = 500,
                                      const Tolerances& tol = {});

}  // namespace evgrid
