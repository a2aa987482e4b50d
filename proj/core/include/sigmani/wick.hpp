#pragma once

#include "sigmani/kernel_expr.hpp"

#include <map>
#include <set>
#include <vector>

namespace sigmani {

/// Iterated Ito integrals on ordered chains in (0,1): a DAG of time variables,
/// each carrying a kernel and a measure (dt, or dB with an abstract component
/// label). Parents are strict upper bounds; top-level variables run to 1.
struct WickVar {
    KernelExpr kernel;
    bool is_db = false;
    int component = -1;        // abstract index id when is_db
    std::set<int> parents;     // -1 denotes the fixed upper limit 1
};

class WickMonomial {
public:
    int add(KernelExpr kernel, std::set<int> parents);               // dt variable
    int add_db(KernelExpr kernel, int component, std::set<int> parents);
    WickVar& var(int id) { return vars_.at(id); }
    const std::map<int, WickVar>& vars() const { return vars_; }

    struct PairingResult {
        std::vector<std::pair<int, int>> deltas; // component-index pairs
        Rational value;
        std::map<std::pair<int, int>, Rational> divergent; // surviving singular parts
    };

    /// Isserlis expectation: sum over perfect matchings of the dB variables;
    /// a pair merges into one dt variable (no self-pairing along the adapted
    /// order, so ancestor pairs vanish). The deterministic DAG integral is
    /// the sum over linear extensions, integrated innermost-out.
    std::vector<PairingResult> expectation() const;

private:
    std::map<int, WickVar> vars_;
    int next_ = 0;
};

} // namespace sigmani
