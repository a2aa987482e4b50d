#pragma once

#include "sigmani/oracle.hpp"

#include <map>
#include <string>
#include <vector>

namespace sigmani {
namespace oracle {

/// Golden reference tables loaded from data/reference/*.json.
struct GoldenData {
    std::map<std::string, Table> t2_cases;                      // case -> total table
    std::map<std::string, Table> deg3_cases;                    // case -> total table
    std::map<std::string, std::map<std::string, Table>> deg25;  // case -> directive -> table
    std::map<std::string, std::map<std::string, Table>> deg2;   // case -> directive -> table
    std::vector<std::string> malformed;                         // flagged rows
};

GoldenData load_golden(const std::string& data_dir);

struct AuditEntry {
    std::string where; // "deg2 II;IK / d2phi@0"
    std::string label;
    std::string pattern;
    std::string golden;   // empty if absent
    std::string computed; // empty if absent
};

struct AuditReport {
    std::vector<AuditEntry> mismatches;
    std::vector<std::string> malformed;
    int tables = 0;
    int entries = 0;
    bool t2_aggregate_ok = false;
    bool s1_ok = false;
    // entrywise diffs of the aggregated sums vs the published summary lemmas
    std::vector<AuditEntry> s2_diff;
    std::vector<AuditEntry> s3_diff;
};

/// Recompute every reference table with the engine and diff against golden;
/// also aggregate and compare against the published totals. Mismatches are
/// data, not failures.
AuditReport audit_reference_tables(const GoldenData& g);

std::string format_audit(const AuditReport& rep);

} // namespace oracle
} // namespace sigmani
