#include "sigmani/golden.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace sigmani {
namespace oracle {

namespace {
using nlohmann::json;

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    in >> j;
    return j;
}

// rename letters in a spec according to pattern pairs "ab,cd,...": second -> first
std::string rename_by_pattern(std::string spec, const std::string& pattern) {
    std::map<char, char> ren;
    std::stringstream ss(pattern);
    std::string pair;
    while (std::getline(ss, pair, ',')) {
        if (pair.size() == 2) ren[pair[1]] = pair[0];
    }
    for (auto& c : spec) {
        while (ren.count(c)) c = ren[c];
    }
    return spec;
}

void add_entry(Table& t, const std::string& slots, const std::string& pattern,
               const Rational& value,
               const std::vector<std::pair<std::string, std::string>>& scalars = {}) {
    if (value == 0) return;
    std::string s2 = rename_by_pattern(slots, pattern);
    std::vector<std::pair<std::string, std::string>> sc2;
    for (const auto& [k, v] : scalars) sc2.emplace_back(k, rename_by_pattern(v, pattern));
    const std::string key = parse_key(s2, sc2);
    t[key] += value;
    if (t[key] == 0) t.erase(key);
}

void add_slot_entry(Table& t, std::vector<std::string> slots, const std::string& pattern,
                    const Rational& value) {
    if (value == 0) return;
    for (auto& s : slots) {
        auto colon = s.find(':');
        if (colon != std::string::npos)
            s = s.substr(0, colon + 1) + rename_by_pattern(s.substr(colon + 1), pattern);
    }
    const std::string key = parse_key_slots(slots);
    t[key] += value;
    if (t[key] == 0) t.erase(key);
}
} // namespace

GoldenData load_golden(const std::string& dir) {
    GoldenData g;
    {
        json j = load_json(dir + "/t2_cases.json");
        const auto patterns = j.at("patterns").get<std::vector<std::string>>();
        for (auto it = j.at("cases").begin(); it != j.at("cases").end(); ++it) {
            Table t;
            const auto vals = it.value().get<std::vector<std::string>>();
            for (std::size_t i = 0; i < patterns.size(); ++i)
                add_entry(t, "ijkl", patterns[i], parse_rational(vals[i]));
            g.t2_cases[it.key()] = std::move(t);
        }
    }
    {
        json j = load_json(dir + "/t3_deg3_cases.json");
        for (auto it = j.at("cases").begin(); it != j.at("cases").end(); ++it) {
            Table t;
            for (const auto& e : it.value()) {
                const std::string spec = e.at(0).get<std::string>();
                t[parse_key(spec)] += parse_rational(e.at(1).get<std::string>());
            }
            g.deg3_cases[it.key()] = std::move(t);
        }
    }
    {
        json j = load_json(dir + "/t3_deg25_cases.json");
        for (auto it = j.at("cases").begin(); it != j.at("cases").end(); ++it) {
            std::map<std::string, Table> rows;
            for (const auto& r : it.value()) {
                Table t;
                const auto slots = r.at("slots").get<std::vector<std::string>>();
                if (r.contains("value")) {
                    // fully contracted row: single coefficient, no free pattern
                    add_slot_entry(t, slots, "", parse_rational(r.at("value").get<std::string>()));
                } else {
                    const auto patterns = r.at("patterns").get<std::vector<std::string>>();
                    const auto& vals = r.at("values");
                    for (std::size_t i = 0; i < patterns.size(); ++i) {
                        if (vals[i].is_null()) continue;
                        add_slot_entry(t, slots, patterns[i],
                                       parse_rational(vals[i].get<std::string>()));
                    }
                }
                Table& dst = rows[r.at("directive").get<std::string>()];
                dst = add(dst, t);
            }
            g.deg25[it.key()] = std::move(rows);
        }
    }
    {
        json j = load_json(dir + "/t3_deg2_cases.json");
        const auto delta15 = j.at("delta15").get<std::vector<std::string>>();
        for (auto it = j.at("cases").begin(); it != j.at("cases").end(); ++it) {
            std::map<std::string, Table> rows;
            for (const auto& r : it.value()) {
                const std::string directive = r.at("directive").get<std::string>();
                if (r.contains("malformed") && r.at("malformed").get<bool>()) {
                    g.malformed.push_back("deg2 " + it.key() + " / " + directive + ": " +
                                          r.value("note", std::string("malformed row")));
                    continue;
                }
                Table t;
                if (r.contains("label")) {
                    const std::string label = r.at("label").get<std::string>();
                    const auto vals = r.at("values").get<std::vector<std::string>>();
                    for (std::size_t i = 0; i < delta15.size(); ++i)
                        add_entry(t, label, delta15[i], parse_rational(vals[i]));
                } else {
                    for (const auto& e : r.at("entries")) {
                        const auto sc = e.at("scalar").get<std::vector<std::string>>();
                        add_entry(t, e.at("slots").get<std::string>(),
                                  e.at("pattern").get<std::string>(),
                                  parse_rational(e.at("value").get<std::string>()),
                                  {{sc[0], sc[1]}});
                    }
                }
                Table& dst = rows[directive];
                dst = add(dst, t);
            }
            g.deg2[it.key()] = std::move(rows);
        }
    }
    return g;
}

namespace {
void diff_tables(const std::string& where, const Table& golden, const Table& computed,
                 std::vector<AuditEntry>& out, int& entries) {
    Table keys = golden;
    for (const auto& [k, v] : computed) keys[k] += 0;
    for (const auto& [k, unused] : keys) {
        (void)unused;
        ++entries;
        auto ig = golden.find(k);
        auto ic = computed.find(k);
        const bool hg = ig != golden.end() && ig->second != 0;
        const bool hc = ic != computed.end() && ic->second != 0;
        if (hg && hc && ig->second == ic->second) continue;
        if (!hg && !hc) continue;
        Table one{{k, hg ? ig->second : ic->second}};
        auto p = pretty(one).front();
        AuditEntry e;
        e.where = where;
        e.label = p.label;
        e.pattern = p.pattern;
        if (hg) e.golden = to_string(ig->second);
        if (hc) e.computed = to_string(ic->second);
        out.push_back(std::move(e));
    }
}
} // namespace

AuditReport audit_reference_tables(const GoldenData& g) {
    AuditReport rep;
    rep.malformed = g.malformed;

    Table agg2;
    for (const auto& [word, golden] : g.t2_cases) {
        CaseResult r = eval_case(word, 2);
        ++rep.tables;
        diff_tables("t2 " + word, golden, r.total, rep.mismatches, rep.entries);
        agg2 = add(agg2, r.total);
    }
    rep.t2_aggregate_ok = (agg2 == total_t2_reference());

    Table s1;
    for (const auto& [word, golden] : g.deg3_cases) {
        CaseResult r = eval_case(word, 3);
        Table expanded = expand_composites(r.total);
        ++rep.tables;
        diff_tables("deg3 " + word, golden, expanded, rep.mismatches, rep.entries);
        s1 = add(s1, expanded);
    }
    rep.s1_ok = (s1 == total_S1_reference());

    for (const auto& [word, rows] : g.deg25) {
        CaseResult r = eval_case(word, 3);
        for (const auto& [directive, golden] : rows) {
            ++rep.tables;
            auto it = r.by_directive.find(directive);
            static const Table empty;
            diff_tables("deg2.5 " + word + " / " + directive, golden,
                        it == r.by_directive.end() ? empty : it->second, rep.mismatches,
                        rep.entries);
        }
    }

    for (const auto& [word, rows] : g.deg2) {
        CaseResult r = eval_case(word, 3);
        for (const auto& [directive, golden] : rows) {
            ++rep.tables;
            auto it = r.by_directive.find(directive);
            static const Table empty;
            diff_tables("deg2 " + word + " / " + directive, golden,
                        it == r.by_directive.end() ? empty : it->second, rep.mismatches,
                        rep.entries);
        }
    }

    int dummy = 0;
    diff_tables("S2 total", total_S2_reference(), aggregate(deg25_case_list(), 3), rep.s2_diff,
                dummy);
    diff_tables("S3 total", total_S3_reference(), aggregate(deg2_case_list(), 3), rep.s3_diff,
                dummy);
    return rep;
}

std::string format_audit(const AuditReport& rep) {
    std::ostringstream os;
    os << "reference-table audit: " << rep.tables << " tables, " << rep.entries
       << " entries compared\n";
    os << "t2 aggregate matches published total: " << (rep.t2_aggregate_ok ? "yes" : "NO") << "\n";
    os << "degree-3 aggregate matches published total: " << (rep.s1_ok ? "yes" : "NO") << "\n";
    if (!rep.malformed.empty()) {
        os << "malformed rows (" << rep.malformed.size() << "):\n";
        for (const auto& m : rep.malformed) os << "  " << m << "\n";
    }
    os << "table mismatches (" << rep.mismatches.size() << "):\n";
    for (const auto& e : rep.mismatches)
        os << "  " << e.where << ": " << e.label << " " << e.pattern << " golden="
           << (e.golden.empty() ? "-" : e.golden) << " oracle="
           << (e.computed.empty() ? "-" : e.computed) << "\n";
    auto dump_total = [&](const char* name, const std::vector<AuditEntry>& v) {
        os << name << " disagreements vs published summary (" << v.size() << "):\n";
        for (const auto& e : v)
            os << "  " << e.label << " " << e.pattern << " published="
               << (e.golden.empty() ? "-" : e.golden) << " oracle="
               << (e.computed.empty() ? "-" : e.computed) << "\n";
    };
    dump_total("S2", rep.s2_diff);
    dump_total("S3", rep.s3_diff);
    return os.str();
}

} // namespace oracle
} // namespace sigmani
