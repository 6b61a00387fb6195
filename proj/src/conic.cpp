#include "evgrid/conic.hpp"

#include <cmath>
#include <sstream>

namespace evgrid {

int ConicProblem::add_var(const std::string& name, double cost) {
    costs_.push_back(cost);
    var_names_.push_back(name);
    return static_cast<int>(costs_.size()) - 1;
}

void ConicProblem::set_cost(int var, double cost) { costs_.at(var) = cost; }
void ConicProblem::add_cost(int var, double cost) { costs_.at(var) += cost; }

void ConicProblem::mark_binary(int var) { binaries_.push_back(var); }

int ConicProblem::add_eq(const std::string& label, const LinExpr& expr) {
    const int row = static_cast<int>(eq_rhs_.size());
    for (auto [v, c] : expr.terms)
        if (c != 0.0) eq_triplets_.emplace_back(row, v, c);
    eq_rhs_.push_back(-expr.constant);
    eq_labels_.push_back(label);
    return row;
}

int ConicProblem::push_cone_row(const std::string& label, const LinExpr& expr) {
    const int row = static_cast<int>(cone_rhs_.size());
    // slack = b - A x must equal expr(x) => A row = -coefs, b = constant.
    for (auto [v, c] : expr.terms)
        if (c != 0.0) cone_triplets_.emplace_back(row, v, -c);
    cone_rhs_.push_back(expr.constant);
    cone_labels_.push_back(label);
    return row;
}

int ConicProblem::add_nonneg(const std::string& label, const LinExpr& expr) {
    const int first = push_cone_row(label, expr);
    cones_.push_back({ConeType::NonNeg, 1, first});
    return first;
}

int ConicProblem::add_soc(const std::string& label, const std::vector<LinExpr>& exprs) {
    if (exprs.size() < 2) throw SolverError("soc block needs dimension >= 2");
    int first = -1;
    for (size_t i = 0; i < exprs.size(); ++i) {
        int r = push_cone_row(label + "[" + std::to_string(i) + "]", exprs[i]);
        if (i == 0) first = r;
    }
    cones_.push_back({ConeType::Soc, static_cast<int>(exprs.size()), first});
    return first;
}

int ConicProblem::add_rsoc(const std::string& label, const std::vector<LinExpr>& exprs) {
    if (exprs.size() < 3) throw SolverError("rsoc block needs dimension >= 3");
    int first = -1;
    for (size_t i = 0; i < exprs.size(); ++i) {
        int r = push_cone_row(label + "[" + std::to_string(i) + "]", exprs[i]);
        if (i == 0) first = r;
    }
    cones_.push_back({ConeType::RSoc, static_cast<int>(exprs.size()), first});
    return first;
}

void ConicProblem::add_box(int var, double lo, double hi) {
    if (std::isfinite(lo)) add_nonneg(var_names_[var] + ">=lo", LinExpr(-lo).add(var, 1.0));
    if (std::isfinite(hi)) add_nonneg(var_names_[var] + "<=hi", LinExpr(hi).add(var, -1.0));
}

int ConicProblem::var_index(const std::string& name) const {
    for (size_t i = 0; i < var_names_.size(); ++i)
        if (var_names_[i] == name) return static_cast<int>(i);
    return -1;
}

Eigen::VectorXd ConicProblem::cost_vector() const {
    return Eigen::Map<const Eigen::VectorXd>(costs_.data(), static_cast<long>(costs_.size()));
}

Eigen::SparseMatrix<double> ConicProblem::eq_matrix() const {
    Eigen::SparseMatrix<double> A(num_eq_rows(), num_vars());
    A.setFromTriplets(eq_triplets_.begin(), eq_triplets_.end());
    return A;
}

Eigen::VectorXd ConicProblem::eq_rhs() const {
    return Eigen::Map<const Eigen::VectorXd>(eq_rhs_.data(), static_cast<long>(eq_rhs_.size()));
}

Eigen::SparseMatrix<double> ConicProblem::cone_matrix() const {
    Eigen::SparseMatrix<double> G(num_cone_rows(), num_vars());
    G.setFromTriplets(cone_triplets_.begin(), cone_triplets_.end());
    return G;
}

Eigen::VectorXd ConicProblem::cone_rhs() const {
    return Eigen::Map<const Eigen::VectorXd>(cone_rhs_.data(),
                                             static_cast<long>(cone_rhs_.size()));
}

void ConicProblem::fix_var(int var, double value) {
    add_eq("fix:" + var_names_.at(var), LinExpr(-value).add(var, 1.0));
}

std::string ConicProblem::dump() const {
    std::ostringstream os;
    os.precision(17);
    os << "conicproblem 1\n";
    os << "vars " << num_vars() << " eq " << num_eq_rows() << " cone " << num_cone_rows() << "\n";
    for (int v = 0; v < num_vars(); ++v) os << "var " << v << " " << var_names_[v] << "\n";
    for (int v = 0; v < num_vars(); ++v)
        if (costs_[v] != 0.0) os << "c " << v << " " << costs_[v] << "\n";
    for (const auto& t : eq_triplets_) os << "A " << t.row() << " " << t.col() << " " << t.value() << "\n";
    for (int r = 0; r < num_eq_rows(); ++r) os << "b " << r << " " << eq_rhs_[r] << "\n";
    for (const auto& t : cone_triplets_) os << "G " << t.row() << " " << t.col() << " " << t.value() << "\n";
    for (int r = 0; r < num_cone_rows(); ++r) os << "h " << r << " " << cone_rhs_[r] << "\n";
    for (const auto& blk : cones_) {
        os << "cone "
           << (blk.type == ConeType::NonNeg ? "nonneg" : blk.type == ConeType::Soc ? "soc" : "rsoc")
           << " " << blk.dim << "\n";
    }
    for (int v : binaries_) os << "binary " << v << "\n";
    return os.str();
}

ConicProblem ConicProblem::parse_dump(const std::string& text) {
    std::istringstream is(text);
    std::string tag;
    int version = 0;
    is >> tag >> version;
    if (tag != "conicproblem" || version != 1)
        throw SolverError("problem dump: unrecognized header");
    ConicProblem p;
    int nvars = 0, neq = 0, ncone = 0;
    std::string kw;
    is >> kw >> nvars >> kw >> neq >> kw >> ncone;
    p.costs_.assign(nvars, 0.0);
    p.var_names_.assign(nvars, "");
    p.eq_rhs_.assign(neq, 0.0);
    p.eq_labels_.assign(neq, "");
    p.cone_rhs_.assign(ncone, 0.0);
    p.cone_labels_.assign(ncone, "");
    int next_cone_row = 0;
    while (is >> tag) {
        if (tag == "var") {
            int v;
            std::string name;
            is >> v >> name;
            p.var_names_.at(v) = name;
        } else if (tag == "c") {
            int v;
            double val;
            is >> v >> val;
            p.costs_.at(v) = val;
        } else if (tag == "A") {
            int r, ccol;
            double val;
            is >> r >> ccol >> val;
            p.eq_triplets_.emplace_back(r, ccol, val);
        } else if (tag == "b") {
            int r;
            double val;
            is >> r >> val;
            p.eq_rhs_.at(r) = val;
        } else if (tag == "G") {
            int r, ccol;
            double val;
            is >> r >> ccol >> val;
            p.cone_triplets_.emplace_back(r, ccol, val);
        } else if (tag == "h") {
            int r;
            double val;
            is >> r >> val;
            p.cone_rhs_.at(r) = val;
        } else if (tag == "cone") {
            std::string type;
            int dim;
            is >> type >> dim;
            ConeType ct = type == "nonneg" ? ConeType::NonNeg
                          : type == "soc"  ? ConeType::Soc
                                           : ConeType::RSoc;
            p.cones_.push_back({ct, dim, next_cone_row});
            next_cone_row += dim;
        } else if (tag == "binary") {
            int v;
            is >> v;
            p.binaries_.push_back(v);
        } else {
            throw SolverError("problem dump: unknown tag '" + tag + "'");
        }
    }
    if (next_cone_row != ncone) throw SolverError("problem dump: cone dims do not cover rows");
    return p;
}

std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
        case SolveStatus::MaxIterations: return "max-iterations";
    }
    return "?";
}

}  // namespace evgrid
