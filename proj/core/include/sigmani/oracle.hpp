#pragma once

#include "sigmani/rational.hpp"

#include <map>
#include <string>
#include <vector>

namespace sigmani {
namespace oracle {

/// A coefficient table: canonical term key -> exact rational.
///
/// A key encodes four tensor-slot labels, optional scalar factors and the
/// full Einstein matching of index positions, e.g.
///   "K:dphi,phi,dphi,phi;X:;M:s0.0-s0.1,s1.0-s3.0,s2.0-s2.1"
/// which reads as phi_{i,i|j|k,k|j} in index-letter form. Symmetric argument pairs
/// (second derivatives, the a-matrix) are canonicalized to the smallest key.
using Table = std::map<std::string, Rational>;

/// Human-readable forms for reports: index-letter label plus delta pattern.
struct PrettyEntry {
    std::string label;
    std::string pattern;
    std::string value;
};
std::vector<PrettyEntry> pretty(const Table& t);

struct CaseResult {
    std::string word;                         // e.g. "II;IK", "JI;P"
    int target_power = 2;                     // t-power of the extracted coefficient
    std::map<std::string, Table> by_directive;
    Table total;                              // composite labels (varphi kept)
};

/// Evaluates one Pi (x) Pi combination at the requested t-power.
/// Directives name the Taylor-expansion rows of the coefficient tables:
/// "base", "dphi@k", "d2phi@k", "dphi@k1+dphi@k2", "dvarphi@k", "bbar", "aexp".
CaseResult eval_case(const std::string& word, int target_power);

/// Expand composite labels (varphi, dvarphi) into primitive ones
/// (varphi = 1/2 d_a phi_a etc.); used before aggregation.
Table expand_composites(const Table& t);

Table add(const Table& a, const Table& b);
Table scale(const Table& a, const Rational& c);

/// Case lists from the decomposition order bookkeeping.
std::vector<std::string> t2_case_list();       // 25 cases, coefficient of t^2
std::vector<std::string> deg3_case_list();     // 26 cases, leading t^3
std::vector<std::string> deg25_case_list();    // 40 cases (20 + factor swaps)
std::vector<std::string> deg2_case_list();     // 25 cases, expanded to t^3

/// Aggregates (expanded to primitive labels).
Table aggregate(const std::vector<std::string>& cases, int target_power);

/// Reference totals assembled from the published summary lemmas.
Table total_t2_reference();    // (1/12) on d(ik)d(jl), -(1/12) on d(il)d(jk)
Table total_S1_reference();
Table total_S2_reference();
Table total_S3_reference();

// ---- helpers used by golden data and tests ----

/// Builds a canonical key from an index-letter spec, e.g. parse_key("i,i|j|k,k|j")
/// or parse_key("ijkl", {{"dbbar", "pi"}}) for scalar-
/// bearing entries. Letters repeated exactly twice define the matching.
std::string parse_key(const std::string& slots_spec,
                      const std::vector<std::pair<std::string, std::string>>& scalars = {});

/// Same but with explicit slot structure strings, one per tensor slot:
/// "phi:i", "dphi:i,p", "d2phi:i,pq", "varphi", "dvarphi:p".
std::string parse_key_slots(const std::vector<std::string>& slots,
                            const std::vector<std::pair<std::string, std::string>>& scalars = {});

/// Numeric evaluation of an (expanded) table on concrete jet data; returns the
/// flat N^4 tensor. Arrays: phi[i][a], dphi[p][i][a], d2phi[p][q][i][a],
/// dbbar[p][m], d2a[i][j][p][q] with chart indices < d and ambient size N.
std::vector<double> eval_numeric(const Table& t, int d, int N,
                                 const std::vector<std::vector<double>>& phi,
                                 const std::vector<std::vector<std::vector<double>>>& dphi,
                                 const std::vector<std::vector<std::vector<std::vector<double>>>>& d2phi,
                                 const std::vector<std::vector<double>>& dbbar,
                                 const std::vector<double>& d2a_flat);

} // namespace oracle
} // namespace sigmani
