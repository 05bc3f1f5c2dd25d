#pragma once

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

namespace causalite {

/// One counterexample: enough to re-execute the failing check in isolation.
struct Witness {
    std::string interventional;  // canonical label of the low-level interventional
    std::string base;            // base input (empty when not interchange-derived)
    std::string source;          // source input (empty when not interchange-derived)
    std::string low_run;         // low-level result
    std::string translated;      // tau of the low-level result
    std::string high_run;        // high-level result
    std::string detail;          // first mismatching variable / reason

    std::string canonical_key() const {
        return base + "\x1f" + source + "\x1f" + interventional + "\x1f" + detail;
    }

    friend bool operator==(const Witness& a, const Witness& b) {
        return a.canonical_key() == b.canonical_key();
    }
};

/// Pass/fail verdict with canonically ordered counterexamples. fail iff
/// witnesses nonempty.
struct VerificationReport {
    std::string check;                 // "constructive-abstraction", ...
    long checked = 0;                  // primary enumeration size
    long recursive_checked = 0;        // sampled recursive-interchange checks
    long margin_violations = 0;        // toleranced indicator decisions in the gray band
    bool toleranced = false;
    std::vector<Witness> witnesses;
    std::vector<std::string> notes;    // e.g. pulled-back interventional labels

    bool pass() const { return witnesses.empty(); }

    /// Sort canonically; an unresolved ambiguity in toleranced indicator
    /// decisions is itself a counterexample (fail iff witnesses nonempty).
    void sort_witnesses() {
        std::stable_sort(witnesses.begin(), witnesses.end(),
                         [](const Witness& a, const Witness& b) {
                             return a.canonical_key() < b.canonical_key();
                         });
        if (margin_violations > 0) {
            for (const auto& w : witnesses)
                if (w.interventional == "tolerance") return;
            Witness w;
            w.interventional = "tolerance";
            w.detail = std::to_string(margin_violations) +
                       " indicator decision(s) fell inside the ambiguity band";
            witnesses.push_back(std::move(w));
        }
    }

    void merge(const VerificationReport& other) {
        checked += other.checked;
        recursive_checked += other.recursive_checked;
        margin_violations += other.margin_violations;
        witnesses.insert(witnesses.end(), other.witnesses.begin(), other.witnesses.end());
        for (const auto& n : other.notes) notes.push_back(n);
    }

    /// Stable field order; suitable for byte-exact golden files.
    std::string to_text() const {
        std::ostringstream os;
        os << "check: " << check << "\n";
        os << "mode: " << (toleranced ? "tolerance" : "exact") << "\n";
        os << "checked: " << checked << "\n";
        os << "recursive-checked: " << recursive_checked << "\n";
        os << "margin-violations: " << margin_violations << "\n";
        os << "verdict: " << (pass() ? "pass" : "fail") << "\n";
        os << "witnesses: " << witnesses.size() << "\n";
        for (std::size_t i = 0; i < witnesses.size(); ++i) {
            const auto& w = witnesses[i];
            os << "witness " << (i + 1) << "\n";
            os << "  interventional: " << w.interventional << "\n";
            if (!w.base.empty()) os << "  base: " << w.base << "\n";
            if (!w.source.empty()) os << "  source: " << w.source << "\n";
            if (!w.low_run.empty()) os << "  low-run: " << w.low_run << "\n";
            if (!w.translated.empty()) os << "  translated: " << w.translated << "\n";
            if (!w.high_run.empty()) os << "  high-run: " << w.high_run << "\n";
            os << "  mismatch: " << w.detail << "\n";
        }
        for (const auto& n : notes) os << "note: " << n << "\n";
        return os.str();
    }
};

}  // namespace causalite
