#include <algorithm>
#include <cmath>
#include <queue>

#include "evgrid/conic.hpp"

namespace evgrid {

namespace {

constexpr double kIntTol = 1e-6;

bool integral(const Eigen::VectorXd& x, const std::vector<int>& bins) {
    for (int v : bins)
        if (std::abs(x[v] - std::round(x[v])) > kIntTol) return false;
    return true;
}

ConicProblem with_fixes(const ConicProblem& base, const std::vector<int>& bins,
                        const std::vector<double>& values) {
    ConicProblem p = base;
    for (size_t i = 0; i < bins.size(); ++i) {
        if (values[i] >= 0.0) p.fix_var(bins[i], values[i]);
    }
    return p;
}

struct Node {
    std::vector<double> fixes;  // -1 = free
    double bound;
    bool operator<(const Node& o) const { return bound > o.bound; }  // min-heap
};

}  // namespace

BinarySolveResult solve_with_binaries(const ConicProblem& p, BinaryStrategy strategy,
                                      int node_limit, const Tolerances& tol) {
    BinarySolveResult res;
    const std::vector<int>& bins = p.binary_vars();

    ConicSolution relax = solve(p, tol);
    if (relax.status == SolveStatus::Infeasible || relax.status == SolveStatus::Unbounded ||
        bins.empty()) {
        res.solution = std::move(relax);
        for (int v : bins) res.committed.push_back(res.solution.x.size() ? res.solution.x[v] : 0.0);
        return res;
    }

    auto resolve_fixed = [&](const std::vector<double>& values) {
        ConicSolution s = solve(with_fixes(p, bins, values), tol);
        return s;
    };

    if (integral(relax.x, bins) || strategy == BinaryStrategy::RelaxRoundResolve) {
        std::vector<double> rounded(bins.size());
        for (size_t i = 0; i < bins.size(); ++i) rounded[i] = std::round(relax.x[bins[i]]);
        ConicSolution fixed = resolve_fixed(rounded);
        if (fixed.status == SolveStatus::Optimal) {
            res.solution = std::move(fixed);
            res.committed = std::move(rounded);
            return res;
        }
        // Rounding broke feasibility; fall through to branch and bound.
        res.used_branch_bound = true;
    }

    std::priority_queue<Node> open;
    open.push({std::vector<double>(bins.size(), -1.0), relax.objective});
    std::vector<double> best_fix;
    double best_obj = std::numeric_limits<double>::infinity();
    int nodes = 0;

    while (!open.empty() && nodes < node_limit) {
        Node node = open.top();
        open.pop();
        if (node.bound >= best_obj - 1e-9 * (1.0 + std::abs(best_obj))) continue;
        ++nodes;
        ConicSolution s = solve(with_fixes(p, bins, node.fixes), tol);
        if (s.status != SolveStatus::Optimal) continue;
        if (s.objective >= best_obj - 1e-9 * (1.0 + std::abs(best_obj))) continue;
        if (integral(s.x, bins)) {
            best_obj = s.objective;
            best_fix.resize(bins.size());
            for (size_t i = 0; i < bins.size(); ++i) best_fix[i] = std::round(s.x[bins[i]]);
            continue;
        }
        // Branch on the most fractional binary.
        int pick = -1;
        double worst = -1.0;
        for (size_t i = 0; i < bins.size(); ++i) {
            if (node.fixes[i] >= 0.0) continue;
            const double frac = std::abs(s.x[bins[i]] - std::round(s.x[bins[i]]));
            if (frac > worst) {
                worst = frac;
                pick = static_cast<int>(i);
            }
        }
        if (pick < 0) continue;
        for (double v : {0.0, 1.0}) {
            Node child = node;
            child.fixes[pick] = v;
            child.bound = s.objective;
            open.push(child);
        }
    }
    res.used_branch_bound = true;
    res.nodes_explored = nodes;
    res.node_limit_hit = !open.empty() && nodes >= node_limit;

    if (best_fix.empty()) {
        // No integral point found; report the rounded resolve for diagnostics.
        std::vector<double> rounded(bins.size());
        for (size_t i = 0; i < bins.size(); ++i) rounded[i] = std::round(relax.x[bins[i]]);
        res.solution = resolve_fixed(rounded);
        res.committed = std::move(rounded);
        res.solution.message += " branch-and-bound found no integral point";
        return res;
    }
    res.solution = resolve_fixed(best_fix);
    res.committed = std::move(best_fix);
    return res;
}

}  // namespace evgrid
