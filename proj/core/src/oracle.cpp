#include "sigmani/oracle.hpp"

#include "sigmani/wick.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace sigmani {
namespace oracle {

namespace {

const KernelExpr KONE = KernelExpr::constant(1);
const KernelExpr KINV = KernelExpr::monomial(1, 0, -1, 0); // 1/(1-u)
const KernelExpr KLIN = KernelExpr::monomial(1, 0, 1, 0);  // (1-u)
const KernelExpr KLIN2 = KernelExpr::monomial(1, 0, 2, 0); // (1-u)^2

enum class SlotKind { phi, dphi, d2phi, varphi, dvarphi };
enum class ScalarKind { dbbar, d2a };

const char* slot_name(SlotKind k) {
    switch (k) {
        case SlotKind::phi: return "phi";
        case SlotKind::dphi: return "dphi";
        case SlotKind::d2phi: return "d2phi";
        case SlotKind::varphi: return "varphi";
        case SlotKind::dvarphi: return "dvarphi";
    }
    return "?";
}
const char* scalar_name(ScalarKind k) { return k == ScalarKind::dbbar ? "dbbar" : "d2a"; }

int slot_arity(SlotKind k) {
    switch (k) {
        case SlotKind::phi: return 1;
        case SlotKind::dphi: return 2;
        case SlotKind::d2phi: return 3;
        case SlotKind::varphi: return 0;
        case SlotKind::dvarphi: return 1;
    }
    return 0;
}
int scalar_arity(ScalarKind k) { return k == ScalarKind::dbbar ? 2 : 4; }

struct Slot {
    SlotKind kind;
    std::vector<int> args;
};
struct ScalarFactor {
    ScalarKind kind;
    std::vector<int> args;
};

// ---------------- canonical key construction ----------------

struct Pos {
    int where;   // 0 = slot, 1 = scalar
    int idx;     // slot / scalar index
    int arg;
    bool operator<(const Pos& o) const {
        return std::tie(where, idx, arg) < std::tie(o.where, o.idx, o.arg);
    }
    bool operator==(const Pos& o) const {
        return where == o.where && idx == o.idx && arg == o.arg;
    }
};

std::string encode_key(const std::vector<SlotKind>& kinds, const std::vector<ScalarKind>& sck,
                       std::vector<std::pair<Pos, Pos>> match) {
    for (auto& pr : match)
        if (!(pr.first < pr.second)) std::swap(pr.first, pr.second);
    std::sort(match.begin(), match.end());
    std::ostringstream os;
    os << "K:";
    for (std::size_t i = 0; i < kinds.size(); ++i) os << (i ? "," : "") << slot_name(kinds[i]);
    os << ";X:";
    for (std::size_t i = 0; i < sck.size(); ++i) os << (i ? "," : "") << scalar_name(sck[i]);
    os << ";M:";
    bool first = true;
    for (const auto& [a, b] : match) {
        if (!first) os << ",";
        first = false;
        os << (a.where ? 'x' : 's') << a.idx << '.' << a.arg << '-'
           << (b.where ? 'x' : 's') << b.idx << '.' << b.arg;
    }
    return os.str();
}

std::string canonical_key(const std::vector<Slot>& slots, const std::vector<ScalarFactor>& scalars,
                          const std::vector<std::pair<int, int>>& deltas) {
    // index -> positions
    std::map<int, std::vector<Pos>> pos;
    for (int s = 0; s < static_cast<int>(slots.size()); ++s)
        for (int a = 0; a < static_cast<int>(slots[s].args.size()); ++a)
            pos[slots[s].args[a]].push_back(Pos{0, s, a});
    for (int x = 0; x < static_cast<int>(scalars.size()); ++x)
        for (int a = 0; a < static_cast<int>(scalars[x].args.size()); ++a)
            pos[scalars[x].args[a]].push_back(Pos{1, x, a});
    // union-find over deltas
    std::map<int, int> parent;
    std::function<int(int)> find = [&](int i) {
        auto it = parent.find(i);
        if (it == parent.end() || it->second == i) return i;
        int r = find(it->second);
        parent[i] = r;
        return r;
    };
    for (const auto& [a, b] : deltas) {
        int ra = find(a), rb = find(b);
        if (ra != rb) parent[ra] = rb;
    }
    std::map<int, std::vector<Pos>> groups;
    for (const auto& [idx, plist] : pos) {
        auto& g = groups[find(idx)];
        g.insert(g.end(), plist.begin(), plist.end());
    }
    std::vector<std::pair<Pos, Pos>> match;
    for (const auto& [root, plist] : groups) {
        if (plist.size() != 2)
            throw std::logic_error("canonical_key: index does not appear exactly twice");
        match.emplace_back(plist[0], plist[1]);
    }
    std::vector<SlotKind> kinds;
    for (const auto& s : slots) kinds.push_back(s.kind);
    std::vector<ScalarKind> sck;
    for (const auto& x : scalars) sck.push_back(x.kind);

    // symmetry minimization: d2phi arg(1,2) swap; d2a arg(0,1) and arg(2,3) swaps
    std::vector<int> sym_sites; // encoded: slot index (d2phi) or 1000+scalar*2(+1)
    for (int s = 0; s < static_cast<int>(kinds.size()); ++s)
        if (kinds[s] == SlotKind::d2phi) sym_sites.push_back(s);
    for (int x = 0; x < static_cast<int>(sck.size()); ++x)
        if (sck[x] == ScalarKind::d2a) {
            sym_sites.push_back(1000 + 2 * x);
            sym_sites.push_back(1000 + 2 * x + 1);
        }
    std::string best;
    const int combos = 1 << sym_sites.size();
    for (int mask = 0; mask < combos; ++mask) {
        auto m2 = match;
        auto apply_swap = [&](Pos& p, int site) {
            if (site < 1000) { // d2phi at slot=site: swap args 1 <-> 2
                if (p.where == 0 && p.idx == site) {
                    if (p.arg == 1)
                        p.arg = 2;
                    else if (p.arg == 2)
                        p.arg = 1;
                }
            } else {
                const int x = (site - 1000) / 2;
                const bool hi = (site - 1000) % 2; // 0: args 0<->1, 1: args 2<->3
                if (p.where == 1 && p.idx == x) {
                    const int lo = hi ? 2 : 0;
                    if (p.arg == lo)
                        p.arg = lo + 1;
                    else if (p.arg == lo + 1)
                        p.arg = lo;
                }
            }
        };
        for (std::size_t b = 0; b < sym_sites.size(); ++b)
            if (mask & (1 << b))
                for (auto& pr : m2) {
                    apply_swap(pr.first, sym_sites[b]);
                    apply_swap(pr.second, sym_sites[b]);
                }
        std::string key = encode_key(kinds, sck, m2);
        if (best.empty() || key < best) best = key;
    }
    return best;
}

// ---------------- term assembly ----------------

struct TermCtx {
    WickMonomial mono;
    Rational coeff = 1;
    std::vector<Slot> slots;
    std::vector<ScalarFactor> scalars;
    std::vector<std::pair<int, int>> deltas;
    int next_index = 0;
    int fresh() { return next_index++; }
};

void add_atom(TermCtx& ctx, int parent, int comp, const KernelExpr& kernel = KINV) {
    ctx.mono.add_db(kernel, comp, {parent});
}

struct Option {
    std::string tag;   // base | dphi | d2phi | hterm | sigma | dvarphi | dphi_a ...
    Rational extra2;   // twice the extra t-order (0, 1, 2) to stay integral
};

std::vector<Option> options_for(char kind) {
    switch (kind) {
        case 'I':
            return {{"base", 0}, {"dphi", 1}, {"d2phi", 2}, {"hterm", 2}, {"sigma", 2}};
        case 'K':
            return {{"base", 0}, {"dphi", 1}, {"d2phi", 2}, {"sigma", 2}};
        case 'J':
            return {{"base", 0}, {"dvarphi", 1}};
        case 'P':
            return {{"base", 0}, {"dphi_a", 1}, {"dphi_b", 1}, {"d2phi_a", 2},
                    {"d2phi_b", 2}, {"dphi_ab", 2}, {"aexp", 2}};
    }
    throw std::logic_error("bad slot kind");
}

// Build one factor-slot contribution into ctx. `var` is the slot's own time
// variable (already added); for K slots the variable's measure is set to dB.
void build_slot(TermCtx& ctx, char kind, int var, const std::string& tag) {
    auto& mono = ctx.mono;
    const int m = ctx.fresh();
    if (kind == 'I') {
        ctx.coeff = -ctx.coeff;
        if (tag == "base") {
            ctx.slots.push_back({SlotKind::phi, {m}});
            add_atom(ctx, var, m);
        } else if (tag == "dphi") {
            const int p = ctx.fresh();
            ctx.slots.push_back({SlotKind::dphi, {m, p}});
            mono.var(var).kernel = mono.var(var).kernel * KLIN;
            add_atom(ctx, var, p);
            add_atom(ctx, var, m);
        } else if (tag == "d2phi") {
            const int p = ctx.fresh(), q = ctx.fresh();
            ctx.coeff /= 2;
            ctx.slots.push_back({SlotKind::d2phi, {m, p, q}});
            mono.var(var).kernel = mono.var(var).kernel * KLIN2;
            add_atom(ctx, var, p);
            add_atom(ctx, var, q);
            add_atom(ctx, var, m);
        } else if (tag == "hterm") {
            const int k = ctx.fresh();
            ctx.slots.push_back({SlotKind::phi, {m}});
            ctx.scalars.push_back({ScalarKind::dbbar, {k, m}});
            const int eta = mono.add(KONE, {var});
            add_atom(ctx, eta, k);
        } else if (tag == "sigma") {
            const int alpha = ctx.fresh(), p = ctx.fresh(), q = ctx.fresh();
            ctx.coeff /= 4;
            ctx.slots.push_back({SlotKind::phi, {m}});
            ctx.scalars.push_back({ScalarKind::d2a, {m, alpha, p, q}});
            const int eta = mono.add_db(KLIN, alpha, {var});
            add_atom(ctx, eta, p);
            add_atom(ctx, eta, q);
        } else {
            throw std::logic_error("bad I tag " + tag);
        }
    } else if (kind == 'K') {
        if (tag == "base") {
            ctx.slots.push_back({SlotKind::phi, {m}});
            mono.var(var).is_db = true;
            mono.var(var).component = m;
        } else if (tag == "dphi") {
            const int p = ctx.fresh();
            ctx.slots.push_back({SlotKind::dphi, {m, p}});
            mono.var(var).is_db = true;
            mono.var(var).component = m;
            mono.var(var).kernel = mono.var(var).kernel * KLIN;
            add_atom(ctx, var, p);
        } else if (tag == "d2phi") {
            const int p = ctx.fresh(), q = ctx.fresh();
            ctx.coeff /= 2;
            ctx.slots.push_back({SlotKind::d2phi, {m, p, q}});
            mono.var(var).is_db = true;
            mono.var(var).component = m;
            mono.var(var).kernel = mono.var(var).kernel * KLIN2;
            add_atom(ctx, var, p);
            add_atom(ctx, var, q);
        } else if (tag == "sigma") {
            const int alpha = ctx.fresh(), p = ctx.fresh(), q = ctx.fresh();
            ctx.coeff /= 4;
            ctx.slots.push_back({SlotKind::phi, {m}});
            ctx.scalars.push_back({ScalarKind::d2a, {m, alpha, p, q}});
            mono.var(var).is_db = true;
            mono.var(var).component = alpha;
            mono.var(var).kernel = mono.var(var).kernel * KLIN2;
            add_atom(ctx, var, p);
            add_atom(ctx, var, q);
        } else {
            throw std::logic_error("bad K tag " + tag);
        }
    } else if (kind == 'J') {
        if (tag == "base") {
            ctx.slots.push_back({SlotKind::varphi, {}});
        } else if (tag == "dvarphi") {
            const int p = ctx.fresh();
            ctx.slots.push_back({SlotKind::dvarphi, {p}});
            mono.var(var).kernel = mono.var(var).kernel * KLIN;
            add_atom(ctx, var, p);
        } else {
            throw std::logic_error("bad J tag " + tag);
        }
        (void)m;
    } else {
        throw std::logic_error("bad slot kind");
    }
}

void build_p_factor(TermCtx& ctx, const std::string& tag) {
    auto& mono = ctx.mono;
    const int c = mono.add(KONE, {-1});
    const int m1 = ctx.fresh(), m2 = ctx.fresh();
    ctx.coeff /= 2;
    if (tag == "base") {
        ctx.slots.push_back({SlotKind::phi, {m1}});
        ctx.slots.push_back({SlotKind::phi, {m2}});
        ctx.deltas.emplace_back(m1, m2);
    } else if (tag == "dphi_a" || tag == "dphi_b") {
        const int p = ctx.fresh();
        mono.var(c).kernel = mono.var(c).kernel * KLIN;
        add_atom(ctx, c, p);
        if (tag == "dphi_a") {
            ctx.slots.push_back({SlotKind::dphi, {m1, p}});
            ctx.slots.push_back({SlotKind::phi, {m2}});
        } else {
            ctx.slots.push_back({SlotKind::phi, {m1}});
            ctx.slots.push_back({SlotKind::dphi, {m2, p}});
        }
        ctx.deltas.emplace_back(m1, m2);
    } else if (tag == "d2phi_a" || tag == "d2phi_b") {
        const int p = ctx.fresh(), q = ctx.fresh();
        ctx.coeff /= 2;
        mono.var(c).kernel = mono.var(c).kernel * KLIN2;
        add_atom(ctx, c, p);
        add_atom(ctx, c, q);
        if (tag == "d2phi_a") {
            ctx.slots.push_back({SlotKind::d2phi, {m1, p, q}});
            ctx.slots.push_back({SlotKind::phi, {m2}});
        } else {
            ctx.slots.push_back({SlotKind::phi, {m1}});
            ctx.slots.push_back({SlotKind::d2phi, {m2, p, q}});
        }
        ctx.deltas.emplace_back(m1, m2);
    } else if (tag == "dphi_ab") {
        const int p = ctx.fresh(), q = ctx.fresh();
        mono.var(c).kernel = mono.var(c).kernel * KLIN2;
        add_atom(ctx, c, p);
        add_atom(ctx, c, q);
        ctx.slots.push_back({SlotKind::dphi, {m1, p}});
        ctx.slots.push_back({SlotKind::dphi, {m2, q}});
        ctx.deltas.emplace_back(m1, m2);
    } else if (tag == "aexp") {
        const int p = ctx.fresh(), q = ctx.fresh();
        ctx.coeff /= 2;
        mono.var(c).kernel = mono.var(c).kernel * KLIN2;
        add_atom(ctx, c, p);
        add_atom(ctx, c, q);
        ctx.slots.push_back({SlotKind::phi, {m1}});
        ctx.slots.push_back({SlotKind::phi, {m2}});
        ctx.scalars.push_back({ScalarKind::d2a, {m1, m2, p, q}});
    } else {
        throw std::logic_error("bad P tag " + tag);
    }
}

struct FactorSpec {
    bool is_p = false;
    char inner = 0, outer = 0;
};

std::pair<FactorSpec, FactorSpec> parse_word(const std::string& word) {
    auto semi = word.find(';');
    if (semi == std::string::npos) throw std::invalid_argument("case word needs ';'");
    auto mk = [](const std::string& s) {
        FactorSpec f;
        if (s == "P") {
            f.is_p = true;
        } else if (s.size() == 2) {
            f.inner = s[0];
            f.outer = s[1];
        } else {
            throw std::invalid_argument("bad factor word: " + s);
        }
        return f;
    };
    return {mk(word.substr(0, semi)), mk(word.substr(semi + 1))};
}

Rational base_power2(const FactorSpec& f) { // twice the leading t-power
    if (f.is_p) return 2;
    auto w = [](char k) { return k == 'J' ? 2 : 1; };
    return w(f.inner) + w(f.outer);
}

std::string directive_name(const std::vector<std::pair<std::string, int>>& tags) {
    // tags: (tag, tensor-slot index); base entries omitted
    std::vector<std::string> parts;
    for (const auto& [tag, slot] : tags) {
        if (tag == "base") continue;
        if (tag == "hterm") return "bbar";
        if (tag == "sigma" || tag == "aexp") return "aexp";
        std::string t = tag;
        if (t == "dphi_a" || t == "dphi_b") t = "dphi";
        if (t == "d2phi_a" || t == "d2phi_b") t = "d2phi";
        if (t == "dphi_ab") {
            parts.push_back("dphi@" + std::to_string(slot));
            parts.push_back("dphi@" + std::to_string(slot + 1));
            continue;
        }
        parts.push_back(t + "@" + std::to_string(slot));
    }
    if (parts.empty()) return "base";
    std::sort(parts.begin(), parts.end());
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "+" : "") + parts[i];
    return out;
}

} // namespace

Table add(const Table& a, const Table& b) {
    Table out = a;
    for (const auto& [k, v] : b) {
        out[k] += v;
        if (out[k] == 0) out.erase(k);
    }
    return out;
}

Table scale(const Table& a, const Rational& c) {
    Table out;
    if (c == 0) return out;
    for (const auto& [k, v] : a) out[k] = v * c;
    return out;
}

CaseResult eval_case(const std::string& word, int target_power) {
    auto [f1, f2] = parse_word(word);
    CaseResult res;
    res.word = word;
    res.target_power = target_power;
    const Rational extra2 = Rational(2 * target_power) - base_power2(f1) - base_power2(f2);
    if (extra2 < 0) return res;

    // slot descriptors: (kind, tensor slot index, factor id)
    struct SlotDesc {
        char kind; // 'I','J','K' or 'P'
        int tensor_slot;
        int factor;
    };
    std::vector<SlotDesc> sds;
    int ts = 0;
    for (int fi = 0; fi < 2; ++fi) {
        const FactorSpec& f = fi == 0 ? f1 : f2;
        if (f.is_p) {
            sds.push_back({'P', ts, fi});
            ts += 2;
        } else {
            sds.push_back({f.inner, ts++, fi});
            sds.push_back({f.outer, ts++, fi});
        }
    }
    std::vector<std::vector<Option>> opts;
    for (const auto& sd : sds) opts.push_back(options_for(sd.kind));

    std::vector<std::size_t> choice(sds.size(), 0);
    std::function<void(std::size_t, Rational)> rec = [&](std::size_t pos, Rational acc2) {
        if (acc2 > extra2) return;
        if (pos == sds.size()) {
            if (acc2 != extra2) return;
            // build the term context
            TermCtx ctx;
            std::vector<std::pair<std::string, int>> tags;
            std::size_t ci = 0;
            for (int fi = 0; fi < 2; ++fi) {
                const FactorSpec& f = fi == 0 ? f1 : f2;
                if (f.is_p) {
                    const auto& tag = opts[ci][choice[ci]].tag;
                    int base_slot = sds[ci].tensor_slot;
                    if (tag == "dphi_a" || tag == "d2phi_a")
                        tags.emplace_back(tag, base_slot);
                    else if (tag == "dphi_b" || tag == "d2phi_b")
                        tags.emplace_back(tag, base_slot + 1);
                    else
                        tags.emplace_back(tag, base_slot);
                    build_p_factor(ctx, tag);
                    ++ci;
                } else {
                    const int outer = ctx.mono.add(KONE, {-1});
                    const int inner = ctx.mono.add(KONE, {outer});
                    for (int half = 0; half < 2; ++half) {
                        const char kind = half == 0 ? f.inner : f.outer;
                        const int var = half == 0 ? inner : outer;
                        const auto& tag = opts[ci][choice[ci]].tag;
                        tags.emplace_back(tag, sds[ci].tensor_slot);
                        build_slot(ctx, kind, var, tag);
                        ++ci;
                    }
                }
            }
            const std::string dname = directive_name(tags);
            // expectation
            for (const auto& pr : ctx.mono.expectation()) {
                if (!pr.divergent.empty())
                    throw DivergenceError("uncancelled divergence in case " + word);
                auto deltas = ctx.deltas;
                for (const auto& [a, b] : pr.deltas) deltas.emplace_back(a, b);
                const std::string key = canonical_key(ctx.slots, ctx.scalars, deltas);
                const Rational val = ctx.coeff * pr.value;
                if (val == 0) continue;
                auto& tab = res.by_directive[dname];
                tab[key] += val;
                if (tab[key] == 0) tab.erase(key);
                res.total[key] += val;
                if (res.total[key] == 0) res.total.erase(key);
            }
            return;
        }
        for (std::size_t o = 0; o < opts[pos].size(); ++o) {
            choice[pos] = o;
            rec(pos + 1, acc2 + opts[pos][o].extra2);
        }
    };
    rec(0, 0);
    for (auto it = res.by_directive.begin(); it != res.by_directive.end();)
        it = it->second.empty() ? res.by_directive.erase(it) : std::next(it);
    return res;
}

// ---------------- composite expansion ----------------

namespace {
struct RawTerm {
    std::vector<Slot> slots;
    std::vector<ScalarFactor> scalars;
    std::vector<std::pair<int, int>> deltas;
    Rational coeff;
    int next_index;
};

std::pair<std::vector<Slot>, int> decode_slots(const std::string& key,
                                               std::vector<ScalarFactor>& scalars,
                                               std::vector<std::pair<int, int>>& deltas);
} // namespace

Table expand_composites(const Table& t) {
    Table out;
    for (const auto& [key, coeff] : t) {
        std::vector<ScalarFactor> scalars;
        std::vector<std::pair<int, int>> deltas;
        auto [slots, next] = decode_slots(key, scalars, deltas);
        std::vector<RawTerm> terms{{slots, scalars, deltas, coeff, next}};
        for (std::size_t si = 0; si < slots.size(); ++si) {
            std::vector<RawTerm> nterms;
            for (auto& rt : terms) {
                const Slot cur = rt.slots[si];
                if (cur.kind == SlotKind::varphi) {
                    RawTerm a = rt;
                    const int x = a.next_index++, y = a.next_index++;
                    a.slots[si] = {SlotKind::dphi, {x, y}};
                    a.deltas.emplace_back(x, y);
                    a.coeff /= 2;
                    nterms.push_back(std::move(a));
                } else if (cur.kind == SlotKind::dvarphi) {
                    const int p = cur.args[0];
                    RawTerm a = rt;
                    const int x = a.next_index++;
                    a.slots[si] = {SlotKind::phi, {x}};
                    a.scalars.push_back({ScalarKind::dbbar, {p, x}});
                    nterms.push_back(std::move(a));
                    RawTerm b = rt;
                    const int u = b.next_index++, v = b.next_index++;
                    b.slots[si] = {SlotKind::d2phi, {u, p, v}};
                    b.deltas.emplace_back(u, v);
                    b.coeff /= 2;
                    nterms.push_back(std::move(b));
                } else {
                    nterms.push_back(std::move(rt));
                }
            }
            terms = std::move(nterms);
        }
        for (const auto& rt : terms) {
            const std::string k = canonical_key(rt.slots, rt.scalars, rt.deltas);
            out[k] += rt.coeff;
            if (out[k] == 0) out.erase(k);
        }
    }
    return out;
}

namespace {
// decode a canonical key back to slots/scalars/deltas with fresh index ids
std::pair<std::vector<Slot>, int> decode_slots(const std::string& key,
                                               std::vector<ScalarFactor>& scalars,
                                               std::vector<std::pair<int, int>>& deltas) {
    auto kpos = key.find("K:"), xpos = key.find(";X:"), mpos = key.find(";M:");
    if (kpos != 0 || xpos == std::string::npos || mpos == std::string::npos)
        throw std::invalid_argument("bad table key: " + key);
    std::vector<Slot> slots;
    {
        std::stringstream ss(key.substr(2, xpos - 2));
        std::string item;
        while (std::getline(ss, item, ',')) {
            SlotKind k;
            if (item == "phi")
                k = SlotKind::phi;
            else if (item == "dphi")
                k = SlotKind::dphi;
            else if (item == "d2phi")
                k = SlotKind::d2phi;
            else if (item == "varphi")
                k = SlotKind::varphi;
            else if (item == "dvarphi")
                k = SlotKind::dvarphi;
            else
                throw std::invalid_argument("bad slot kind " + item);
            slots.push_back({k, {}});
        }
    }
    {
        std::string xs = key.substr(xpos + 3, mpos - (xpos + 3));
        if (!xs.empty()) {
            std::stringstream ss(xs);
            std::string item;
            while (std::getline(ss, item, ',')) {
                scalars.push_back({item == "dbbar" ? ScalarKind::dbbar : ScalarKind::d2a, {}});
            }
        }
    }
    int next = 0;
    for (auto& s : slots) s.args.assign(slot_arity(s.kind), -1);
    for (auto& x : scalars) x.args.assign(scalar_arity(x.kind), -1);
    auto assign = [&](int where, int idx, int arg) -> int& {
        if (where == 0) return slots[idx].args[arg];
        return scalars[idx].args[arg];
    };
    std::string ms = key.substr(mpos + 3);
    if (!ms.empty()) {
        std::stringstream ss(ms);
        std::string pair;
        while (std::getline(ss, pair, ',')) {
            auto dash = pair.find('-');
            auto parse_pos = [&](const std::string& s) {
                const int where = s[0] == 'x' ? 1 : 0;
                auto dot = s.find('.');
                return std::tuple<int, int, int>(where, std::stoi(s.substr(1, dot - 1)),
                                                 std::stoi(s.substr(dot + 1)));
            };
            auto [w1, i1, a1] = parse_pos(pair.substr(0, dash));
            auto [w2, i2, a2] = parse_pos(pair.substr(dash + 1));
            const int id = next++;
            assign(w1, i1, a1) = id;
            int id2 = next++;
            assign(w2, i2, a2) = id2;
            deltas.emplace_back(id, id2);
        }
    }
    return {slots, next};
}
} // namespace

// ---------------- pretty printing ----------------

std::vector<PrettyEntry> pretty(const Table& t) {
    std::vector<PrettyEntry> out;
    for (const auto& [key, val] : t) {
        std::vector<ScalarFactor> scalars;
        std::vector<std::pair<int, int>> deltas;
        auto [slots, next] = decode_slots(key, scalars, deltas);
        (void)next;
        // name indices: slot mains i,j,k,l in slot order; derivative and scalar
        // indices p,q,u,v,...
        std::map<int, std::string> nm;
        const char* mains = "ijkl";
        const char* extras = "pquvwz";
        int mi = 0, ei = 0;
        for (const auto& s : slots) {
            if (s.kind == SlotKind::phi || s.kind == SlotKind::dphi || s.kind == SlotKind::d2phi) {
                if (!nm.count(s.args[0])) nm[s.args[0]] = std::string(1, mains[mi]);
            }
            ++mi;
        }
        auto extra_name = [&](int id) {
            if (!nm.count(id)) nm[id] = std::string(1, extras[ei++ % 6]);
            return nm[id];
        };
        std::ostringstream lab;
        for (std::size_t s = 0; s < slots.size(); ++s) {
            if (s) lab << "|";
            const auto& sl = slots[s];
            switch (sl.kind) {
                case SlotKind::phi: lab << nm[sl.args[0]]; break;
                case SlotKind::dphi:
                    lab << nm[sl.args[0]] << "," << extra_name(sl.args[1]);
                    break;
                case SlotKind::d2phi:
                    lab << nm[sl.args[0]] << "," << extra_name(sl.args[1]) << extra_name(sl.args[2]);
                    break;
                case SlotKind::varphi: lab << "v"; break;
                case SlotKind::dvarphi: lab << "v," << extra_name(sl.args[0]); break;
            }
        }
        std::string label = "phi_{" + lab.str() + "}";
        for (const auto& x : scalars) {
            std::ostringstream xs;
            if (x.kind == ScalarKind::dbbar)
                xs << "*db(" << extra_name(x.args[0]) << ";" << extra_name(x.args[1]) << ")";
            else
                xs << "*d2a(" << extra_name(x.args[0]) << extra_name(x.args[1]) << ";"
                   << extra_name(x.args[2]) << extra_name(x.args[3]) << ")";
            label += xs.str();
        }
        std::ostringstream pat;
        for (const auto& [a, b] : deltas) pat << "d(" << extra_name(a) << extra_name(b) << ")";
        out.push_back({label, pat.str(), to_string(val)});
    }
    return out;
}

// ---------------- case lists, aggregation, references ----------------

std::vector<std::string> t2_case_list() {
    return {"II;II", "II;IK", "II;KI", "II;KK", "IK;II", "IK;IK", "IK;KI", "IK;KK",
            "KI;II", "KI;IK", "KI;KI", "KI;KK", "KK;II", "KK;IK", "KK;KI", "KK;KK",
            "II;P",  "IK;P",  "KI;P",  "KK;P",  "P;II",  "P;IK",  "P;KI",  "P;KK",  "P;P"};
}

std::vector<std::string> deg3_case_list() {
    return {"JI;JI", "IJ;JI", "JI;IJ", "IJ;IJ", "JI;JK", "IJ;JK", "JI;KJ", "IJ;KJ",
            "JK;JI", "KJ;JI", "JK;IJ", "KJ;IJ", "JK;JK", "KJ;JK", "JK;KJ", "KJ;KJ",
            "JJ;II", "JJ;IK", "JJ;KI", "JJ;KK", "II;JJ", "IK;JJ", "KI;JJ", "KK;JJ",
            "JJ;P",  "P;JJ"};
}

std::vector<std::string> deg25_case_list() {
    std::vector<std::string> base = {"JI;P",  "IJ;P",  "JK;P",  "KJ;P",  "JI;II", "IJ;II", "JK;II",
                                     "KJ;II", "JI;IK", "IJ;IK", "JK;IK", "KJ;IK", "JI;KI", "IJ;KI",
                                     "JK;KI", "KJ;KI", "JI;KK", "IJ;KK", "JK;KK", "KJ;KK"};
    std::vector<std::string> out = base;
    for (const auto& c : base) {
        auto semi = c.find(';');
        out.push_back(c.substr(semi + 1) + ";" + c.substr(0, semi));
    }
    return out;
}

std::vector<std::string> deg2_case_list() { return t2_case_list(); }

Table aggregate(const std::vector<std::string>& cases, int target_power) {
    Table out;
    for (const auto& c : cases) {
        CaseResult r = eval_case(c, target_power);
        out = add(out, expand_composites(r.total));
    }
    return out;
}

std::string parse_key(const std::string& slots_spec,
                      const std::vector<std::pair<std::string, std::string>>& scalars_spec) {
    // groups split by '|': "i" phi, run "jkl" several phis, "i,p" dphi, "i,pq" d2phi
    std::vector<std::string> slot_strs;
    std::stringstream ss(slots_spec);
    std::string group;
    while (std::getline(ss, group, '|')) {
        auto comma = group.find(',');
        if (comma == std::string::npos) {
            for (char c : group) slot_strs.push_back(std::string("phi:") + c);
        } else {
            std::string main = group.substr(0, comma), der = group.substr(comma + 1);
            if (der.size() == 1)
                slot_strs.push_back("dphi:" + main + "," + der);
            else
                slot_strs.push_back("d2phi:" + main + "," + der);
        }
    }
    return parse_key_slots(slot_strs, scalars_spec);
}

std::string parse_key_slots(const std::vector<std::string>& slot_strs,
                            const std::vector<std::pair<std::string, std::string>>& scalars_spec) {
    std::map<char, std::vector<int>> letters;
    int next = 0;
    auto use = [&](char c) {
        letters[c].push_back(next);
        return next++;
    };
    std::vector<Slot> slots;
    for (const auto& s : slot_strs) {
        auto colon = s.find(':');
        std::string kind = colon == std::string::npos ? s : s.substr(0, colon);
        std::string args = colon == std::string::npos ? "" : s.substr(colon + 1);
        if (kind == "phi") {
            slots.push_back({SlotKind::phi, {use(args[0])}});
        } else if (kind == "dphi") {
            slots.push_back({SlotKind::dphi, {use(args[0]), use(args[2])}});
        } else if (kind == "d2phi") {
            slots.push_back({SlotKind::d2phi, {use(args[0]), use(args[2]), use(args[3])}});
        } else if (kind == "varphi") {
            slots.push_back({SlotKind::varphi, {}});
        } else if (kind == "dvarphi") {
            slots.push_back({SlotKind::dvarphi, {use(args[0])}});
        } else {
            throw std::invalid_argument("bad slot " + s);
        }
    }
    std::vector<ScalarFactor> scalars;
    for (const auto& [kind, args] : scalars_spec) {
        ScalarFactor x;
        x.kind = kind == "dbbar" ? ScalarKind::dbbar : ScalarKind::d2a;
        for (char c : args) x.args.push_back(use(c));
        scalars.push_back(x);
    }
    std::vector<std::pair<int, int>> deltas;
    for (const auto& [c, ids] : letters) {
        if (ids.size() != 2)
            throw std::invalid_argument(std::string("index '") + c + "' must appear exactly twice");
        deltas.emplace_back(ids[0], ids[1]);
    }
    return canonical_key(slots, scalars, deltas);
}

Table total_t2_reference() {
    Table t;
    t[parse_key("ijij")] = Rational(1, 12);
    t[parse_key("ijji")] = Rational(-1, 12);
    return t;
}

Table total_S1_reference() {
    Table t;
    t[parse_key("i,i|j|k,k|j")] += Rational(1, 48);
    t[parse_key("i|j,j|i|k,k")] += Rational(1, 48);
    t[parse_key("i,i|jj|k,k")] += Rational(-1, 48);
    t[parse_key("i|j,j|k,k|i")] += Rational(-1, 48);
    return t;
}

namespace {
void add_spec(Table& t, const std::string& spec, const Rational& v) {
    const std::string k = parse_key(spec);
    t[k] += v;
    if (t[k] == 0) t.erase(k);
}
void add_scal(Table& t, const std::string& spec,
              const std::vector<std::pair<std::string, std::string>>& sc, const Rational& v) {
    const std::string k = parse_key(spec, sc);
    t[k] += v;
    if (t[k] == 0) t.erase(k);
}
} // namespace

Table total_S2_reference() {
    Table t;
    add_spec(t, "i,i|j,k|jk", Rational(-1, 48));
    add_spec(t, "i,i|j,k|kj", Rational(1, 48));
    add_spec(t, "i,j|k,k|ij", Rational(-1, 48));
    add_spec(t, "i,j|k,k|ji", Rational(1, 48));
    add_spec(t, "i,i|j|k,k|j", Rational(-1, 48));
    add_spec(t, "i,i|jj|k,k", Rational(1, 48));
    add_spec(t, "i|j,j|k,k|i", Rational(1, 48));
    add_spec(t, "i|j,j|i|k,k", Rational(-1, 48));
    add_spec(t, "ij|i,j|k,k", Rational(-1, 48));
    add_spec(t, "ij|j,i|k,k", Rational(1, 48));
    add_spec(t, "ij|k,k|i,j", Rational(-1, 48));
    add_spec(t, "ij|k,k|j,i", Rational(1, 48));
    return t;
}

Table total_S3_reference() {
    Table t;
    // S3^(1)
    add_spec(t, "i,jk|jik", Rational(1, 60));
    add_spec(t, "i,jk|jki", Rational(-1, 60));
    add_spec(t, "i,kk|jij", Rational(1, 120));
    add_spec(t, "i,kk|jji", Rational(-1, 120));
    add_spec(t, "i|j,ik|jk", Rational(-1, 60));
    add_spec(t, "i|j,ik|kj", Rational(1, 60));
    add_spec(t, "i|j,kk|ij", Rational(1, 120));
    add_spec(t, "i|j,kk|ji", Rational(-1, 120));
    add_spec(t, "ij|i,jk|k", Rational(1, 60));
    add_spec(t, "ij|i,kk|j", Rational(1, 120));
    add_spec(t, "ij|j,ik|k", Rational(-1, 60));
    add_spec(t, "ij|j,kk|i", Rational(-1, 120));
    add_spec(t, "iji|j,kk", Rational(1, 120));
    add_spec(t, "ijj|i,kk", Rational(-1, 120));
    add_spec(t, "ijk|i,jk", Rational(-1, 60));
    add_spec(t, "ijk|j,ik", Rational(1, 60));
    // S3^(2)
    const std::vector<std::pair<std::string, Rational>> s32 = {
        {"i,i|j,k|jk", {-1, 120}}, {"i,i|j,k|kj", {1, 120}},  {"i,j|i,k|jk", {-1, 240}},
        {"i,j|j,k|ik", {1, 240}},  {"i,j|j,k|ki", {-1, 240}}, {"i,k|i,j|jk", {1, 240}},
        {"i,k|j,i|jk", {-1, 240}}, {"i,k|j,i|kj", {1, 240}},  {"i,k|j,j|ik", {1, 120}},
        {"i,k|j,j|ki", {-1, 120}}, {"i,k|j,k|ij", {1, 80}},   {"i,k|j,k|ji", {-1, 80}},
        {"i,i|j|j,k|k", {-1, 360}}, {"i,i|j|k,j|k", {1, 720}}, {"i,i|j|k,k|j", {1, 720}},
        {"i,j|i|j,k|k", {-1, 360}}, {"i,j|j|i,k|k", {1, 180}}, {"i,j|j|k,i|k", {-1, 360}},
        {"i,j|j|k,k|i", {-1, 360}}, {"i,k|i|j,j|k", {1, 720}}, {"i,k|i|j,k|j", {1, 720}},
        {"i,k|j|i,j|k", {1, 45}},  {"i,k|j|i,k|j", {1, 45}},  {"i,k|j|j,i|k", {-1, 90}},
        {"i,k|j|j,k|i", {-1, 90}}, {"i,k|j|k,i|j", {-1, 90}}, {"i,k|j|k,j|i", {-1, 90}},
        {"i,i|jj|k,k", {-1, 720}}, {"i,i|jk|j,k", {1, 360}},  {"i,i|jk|k,j", {-1, 720}},
        {"i,j|ij|k,k", {-1, 720}}, {"i,j|ji|k,k", {1, 360}},  {"i,j|jk|i,k", {-1, 180}},
        {"i,j|jk|k,i", {1, 360}},  {"i,k|ij|j,k", {-1, 720}}, {"i,k|ij|k,j", {1, 360}},
        {"i,k|ji|j,k", {1, 90}},   {"i,k|ji|k,j", {1, 90}},   {"i,k|jj|i,k", {-1, 45}},
        {"i,k|jj|k,i", {1, 90}},   {"i,k|jk|i,j", {-1, 45}},  {"i,k|jk|j,i", {1, 90}},
        {"i|i,j|j,k|k", {1, 360}}, {"i|i,k|j,j|k", {-1, 720}}, {"i|i,k|j,k|j", {-1, 720}},
        {"i|j,i|j,k|k", {-1, 180}}, {"i|j,i|k,j|k", {1, 360}}, {"i|j,i|k,k|j", {1, 360}},
        {"i|j,j|i,k|k", {1, 360}}, {"i|j,j|k,i|k", {-1, 720}}, {"i|j,j|k,k|i", {-1, 720}},
        {"i|j,k|i,j|k", {1, 90}},  {"i|j,k|i,k|j", {1, 90}},  {"i|j,k|j,i|k", {-1, 45}},
        {"i|j,k|j,k|i", {-1, 45}}, {"i|j,k|k,i|j", {1, 90}},  {"i|j,k|k,j|i", {1, 90}},
        {"i|i,j|j|k,k", {1, 720}}, {"i|i,k|j|j,k", {1, 720}}, {"i|i,k|j|k,j", {-1, 360}},
        {"i|j,i|j|k,k", {-1, 360}}, {"i|j,i|k|j,k", {1, 180}}, {"i|j,i|k|k,j", {-1, 360}},
        {"i|j,j|i|k,k", {1, 720}}, {"i|j,j|k|i,k", {-1, 360}}, {"i|j,j|k|k,i", {1, 720}},
        {"i|j,k|i|j,k", {1, 45}},  {"i|j,k|i|k,j", {-1, 90}}, {"i|j,k|j|i,k", {-1, 90}},
        {"i|j,k|j|k,i", {-1, 90}}, {"i|j,k|k|i,j", {-1, 90}}, {"i|j,k|k|j,i", {1, 45}},
        {"ij|i,j|k,k", {1, 120}},  {"ij|i,k|j,k", {1, 80}},   {"ij|i,k|k,j", {1, 240}},
        {"ij|j,i|k,k", {-1, 120}}, {"ij|j,k|i,k", {-1, 80}},  {"ij|j,k|k,i", {-1, 240}},
        {"ij|k,i|j,k", {1, 240}},  {"ij|k,i|k,j", {-1, 240}}, {"ij|k,j|i,k", {-1, 240}},
        {"ij|k,j|k,i", {1, 240}},  {"ij|k,k|i,j", {-1, 120}}, {"ij|k,k|j,i", {1, 120}}};
    for (const auto& [spec, v] : s32) add_spec(t, spec, v);
    // S3^(3): dbbar terms
    add_scal(t, "ijik", {{"dbbar", "kj"}}, Rational(1, 144));
    add_scal(t, "ijik", {{"dbbar", "jk"}}, Rational(1, 144));
    add_scal(t, "ijjk", {{"dbbar", "ki"}}, Rational(-1, 144));
    add_scal(t, "ijjk", {{"dbbar", "ik"}}, Rational(-1, 144));
    add_scal(t, "ijki", {{"dbbar", "kj"}}, Rational(-1, 144));
    add_scal(t, "ijki", {{"dbbar", "jk"}}, Rational(-1, 144));
    add_scal(t, "ijkj", {{"dbbar", "ki"}}, Rational(1, 144));
    add_scal(t, "ijkj", {{"dbbar", "ik"}}, Rational(1, 144));
    // S3^(4): d2a terms
    add_scal(t, "ijik", {{"d2a", "jkll"}}, Rational(11, 1440));
    add_scal(t, "ijjk", {{"d2a", "ikll"}}, Rational(-11, 1440));
    add_scal(t, "ijki", {{"d2a", "jkll"}}, Rational(-11, 1440));
    add_scal(t, "ijkj", {{"d2a", "ikll"}}, Rational(11, 1440));
    add_scal(t, "ijkl", {{"d2a", "ikjl"}}, Rational(1, 120));
    add_scal(t, "ijkl", {{"d2a", "iljk"}}, Rational(-1, 120));
    add_scal(t, "ijkl", {{"d2a", "jkil"}}, Rational(-1, 120));
    add_scal(t, "ijkl", {{"d2a", "jlik"}}, Rational(1, 120));
    return t;
}

// ---------------- numeric evaluation ----------------

std::vector<double> eval_numeric(const Table& t, int d, int N,
                                 const std::vector<std::vector<double>>& phi,
                                 const std::vector<std::vector<std::vector<double>>>& dphi,
                                 const std::vector<std::vector<std::vector<std::vector<double>>>>& d2phi,
                                 const std::vector<std::vector<double>>& dbbar,
                                 const std::vector<double>& d2a_flat) {
    const std::size_t n4 = static_cast<std::size_t>(N) * N * N * N;
    std::vector<double> out(n4, 0.0);
    auto d2a_at = [&](int i, int j, int p, int q) {
        return d2a_flat[((static_cast<std::size_t>(i) * d + j) * d + p) * d + q];
    };
    for (const auto& [key, coeff] : t) {
        std::vector<ScalarFactor> scalars;
        std::vector<std::pair<int, int>> deltas;
        std::vector<Slot> slots;
        {
            // reuse decode via expand path: keys here must be primitive
            Table tmp{{key, Rational(1)}};
            // decode directly
            std::vector<ScalarFactor> sc;
            std::vector<std::pair<int, int>> dl;
            auto pr = decode_slots(key, sc, dl);
            slots = pr.first;
            scalars = sc;
            deltas = dl;
        }
        for (const auto& s : slots)
            if (s.kind == SlotKind::varphi || s.kind == SlotKind::dvarphi)
                throw std::invalid_argument("eval_numeric requires expanded tables");
        // deltas pair indices; iterate over one chart value per pair
        const int P = static_cast<int>(deltas.size());
        std::map<int, int> which; // index id -> pair position
        for (int p = 0; p < P; ++p) {
            which[deltas[p].first] = p;
            which[deltas[p].second] = p;
        }
        std::vector<int> assign(P, 0);
        const double c = static_cast<double>(coeff);
        for (;;) {
            double scal = c;
            for (const auto& x : scalars) {
                if (x.kind == ScalarKind::dbbar)
                    scal *= dbbar[assign[which[x.args[0]]]][assign[which[x.args[1]]]];
                else
                    scal *= d2a_at(assign[which[x.args[0]]], assign[which[x.args[1]]],
                                   assign[which[x.args[2]]], assign[which[x.args[3]]]);
            }
            if (scal != 0.0) {
                // slot vectors
                std::array<const std::vector<double>*, 4> vecs{};
                for (int s = 0; s < 4; ++s) {
                    const auto& sl = slots[s];
                    const int m = assign[which[sl.args[0]]];
                    if (sl.kind == SlotKind::phi) {
                        vecs[s] = &phi[m];
                    } else if (sl.kind == SlotKind::dphi) {
                        vecs[s] = &dphi[assign[which[sl.args[1]]]][m];
                    } else {
                        vecs[s] = &d2phi[assign[which[sl.args[1]]]][assign[which[sl.args[2]]]][m];
                    }
                }
                std::size_t idx = 0;
                for (int a = 0; a < N; ++a)
                    for (int b = 0; b < N; ++b)
                        for (int cc = 0; cc < N; ++cc)
                            for (int e = 0; e < N; ++e)
                                out[idx++] += scal * (*vecs[0])[a] * (*vecs[1])[b] *
                                              (*vecs[2])[cc] * (*vecs[3])[e];
            }
            int pos = P - 1;
            while (pos >= 0 && ++assign[pos] == d) assign[pos--] = 0;
            if (pos < 0) break;
        }
    }
    return out;
}

} // namespace oracle
} // namespace sigmani
