#include "sigmani/wick.hpp"

#include <algorithm>
#include <functional>

namespace sigmani {

int WickMonomial::add(KernelExpr kernel, std::set<int> parents) {
    WickVar v;
    v.kernel = std::move(kernel);
    v.parents = std::move(parents);
    vars_[next_] = std::move(v);
    return next_++;
}

int WickMonomial::add_db(KernelExpr kernel, int component, std::set<int> parents) {
    WickVar v;
    v.kernel = std::move(kernel);
    v.is_db = true;
    v.component = component;
    v.parents = std::move(parents);
    vars_[next_] = std::move(v);
    return next_++;
}

namespace {

using VarMap = std::map<int, WickVar>;

std::map<int, std::set<int>> ancestor_closure(const VarMap& vars) {
    std::map<int, std::set<int>> anc;
    for (const auto& [id, v] : vars) {
        anc[id] = {};
        for (int p : v.parents)
            if (p >= 0) anc[id].insert(p);
    }
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto& [id, s] : anc) {
            std::set<int> add;
            for (int p : s) {
                for (int q : anc[p])
                    if (!s.count(q)) add.insert(q);
            }
            if (!add.empty()) {
                s.insert(add.begin(), add.end());
                changed = true;
            }
        }
    }
    return anc;
}

void matchings(const std::vector<int>& items, std::vector<std::pair<int, int>>& cur,
               const std::function<void(const std::vector<std::pair<int, int>>&)>& emit) {
    if (items.empty()) {
        emit(cur);
        return;
    }
    const int first = items[0];
    for (std::size_t i = 1; i < items.size(); ++i) {
        std::vector<int> rest;
        rest.reserve(items.size() - 2);
        for (std::size_t j = 1; j < items.size(); ++j)
            if (j != i) rest.push_back(items[j]);
        cur.emplace_back(first, items[i]);
        matchings(rest, cur, emit);
        cur.pop_back();
    }
}

// integrate the all-dt DAG: sum over linear extensions, innermost-out
std::pair<Rational, std::map<std::pair<int, int>, Rational>> integrate_dag(const VarMap& vars) {
    std::vector<int> ids;
    ids.reserve(vars.size());
    for (const auto& [id, v] : vars) ids.push_back(id);
    if (ids.empty()) return {Rational(1), {}};
    Rational total = 0;
    std::map<std::pair<int, int>, Rational> resid;

    // Orders are enumerated innermost (earliest time) to outermost: v must be
    // placed before p whenever p is a parent of v, so a variable becomes
    // placeable once every variable listing it as a parent has been placed.
    std::map<int, int> blockers; // number of unplaced u with v in u.parents
    for (int id : ids) blockers[id] = 0;
    for (int id : ids)
        for (int p : vars.at(id).parents)
            if (p >= 0) ++blockers[p];

    std::vector<int> order;
    std::vector<char> placed(static_cast<std::size_t>(*std::max_element(ids.begin(), ids.end())) + 1, 0);

    std::function<void()> rec = [&]() {
        if (order.size() == ids.size()) {
            // integrate innermost-out
            KernelExpr running = KernelExpr::constant(1);
            for (std::size_t i = 0; i < order.size(); ++i) {
                KernelExpr f = vars.at(order[i]).kernel * running;
                if (i + 1 < order.size()) {
                    running = f.integrate_to_upper();
                } else {
                    auto [val, div] = f.integrate01_parts();
                    total += val;
                    for (const auto& [km, c] : div) resid[km] += c;
                }
            }
            return;
        }
        for (int id : ids) {
            if (placed[id] || blockers[id] != 0) continue;
            placed[id] = 1;
            for (int p : vars.at(id).parents)
                if (p >= 0) --blockers[p];
            order.push_back(id);
            rec();
            order.pop_back();
            for (int p : vars.at(id).parents)
                if (p >= 0) ++blockers[p];
            placed[id] = 0;
        }
    };
    rec();
    for (auto it = resid.begin(); it != resid.end();)
        it = it->second == 0 ? resid.erase(it) : std::next(it);
    return {total, resid};
}

} // namespace

std::vector<WickMonomial::PairingResult> WickMonomial::expectation() const {
    std::vector<int> db;
    for (const auto& [id, v] : vars_)
        if (v.is_db) db.push_back(id);
    std::vector<PairingResult> out;
    if (db.size() % 2) return out;

    auto anc = ancestor_closure(vars_);
    std::vector<std::pair<int, int>> cur;
    matchings(db, cur, [&](const std::vector<std::pair<int, int>>& match) {
        // adaptedness: comparable pairs vanish
        for (const auto& [u, v] : match)
            if (anc[u].count(v) || anc[v].count(u)) return;
        VarMap merged = vars_;
        PairingResult pr;
        for (const auto& [u, v] : match) {
            pr.deltas.emplace_back(merged[u].component, merged[v].component);
            merged[u].kernel = merged[u].kernel * merged[v].kernel;
            merged[u].is_db = false;
            merged[u].component = -1;
            for (int p : merged[v].parents) merged[u].parents.insert(p);
            for (auto& [id, w] : merged) {
                if (w.parents.count(v)) {
                    w.parents.erase(v);
                    w.parents.insert(u);
                }
            }
            merged.erase(v);
        }
        // cycle check
        auto anc2 = ancestor_closure(merged);
        for (const auto& [id, s] : anc2)
            if (s.count(id)) return;
        auto [val, resid] = integrate_dag(merged);
        if (val != 0 || !resid.empty()) {
            pr.value = val;
            pr.divergent = std::move(resid);
            out.push_back(std::move(pr));
        }
    });
    return out;
}

} // namespace sigmani
