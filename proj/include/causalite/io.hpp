#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "causalite/alignment.hpp"
#include "causalite/fixtures.hpp"
#include "causalite/intervene.hpp"
#include "causalite/matrix.hpp"
#include "causalite/model.hpp"
#include "causalite/translate.hpp"

namespace causalite {

inline constexpr const char* kToolVersion = "0.1.0";

class ParseError : public std::runtime_error {
  public:
    ParseError(std::size_t line, std::size_t column, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ", column " +
                             std::to_string(column) + ": " + what),
          line_(line),
          column_(column) {}
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

  private:
    std::size_t line_, column_;
};

/// FNV-1a 64-bit; used to stamp fixture hashes into reports.
inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hash_hex(std::string_view data) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(fnv1a64(data)));
    return buf;
}

namespace detail {

struct LineReader {
    std::vector<std::string> lines;
    std::size_t current = 0;

    explicit LineReader(std::string_view text) {
        std::string line;
        for (char c : text) {
            if (c == '\n') {
                lines.push_back(line);
                line.clear();
            } else if (c != '\r') {
                line += c;
            }
        }
        if (!line.empty()) lines.push_back(line);
    }

    bool done() const { return current >= lines.size(); }
    std::size_t line_no() const { return current + 1; }

    /// Next non-empty, non-comment line; nullopt at end.
    std::optional<std::string> next() {
        while (current < lines.size()) {
            const std::string& l = lines[current++];
            std::size_t first = l.find_first_not_of(" \t");
            if (first == std::string::npos) continue;
            if (l[first] == '#') continue;
            return l;
        }
        return std::nullopt;
    }
};

inline std::vector<std::string> split_tokens(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

[[noreturn]] inline void fail_at(std::size_t line, const std::string& msg,
                                 std::size_t column = 1) {
    throw ParseError(line, column, msg);
}

inline Expr parse_expr_at(std::size_t line_no, const std::string& line, std::size_t offset) {
    std::string text = line.substr(offset);
    try {
        return parse_expression(text);
    } catch (const ExprParseError& ex) {
        throw ParseError(line_no, offset + ex.offset() + 1, ex.what());
    }
}

inline ValueDomain parse_domain(std::size_t line_no, const std::vector<std::string>& tokens,
                                std::size_t start) {
    if (start >= tokens.size()) fail_at(line_no, "missing domain");
    if (tokens[start] == "boolean") return ValueDomain::boolean();
    if (tokens[start] == "real") return ValueDomain::real();
    if (tokens[start] == "enum") {
        std::vector<Rat> values;
        for (std::size_t i = start + 1; i < tokens.size(); ++i) {
            auto v = rat_parse(tokens[i]);
            if (!v) fail_at(line_no, "malformed rational '" + tokens[i] + "'");
            values.push_back(*v);
        }
        if (values.empty()) fail_at(line_no, "enum domain needs values");
        return ValueDomain::finite(values);
    }
    fail_at(line_no, "unknown domain '" + tokens[start] + "'");
}

inline std::size_t keyword_offset(const std::string& line, std::size_t token_index) {
    // byte offset of the token with the given index (0-based), for column info
    std::size_t pos = 0, seen = 0;
    while (pos < line.size()) {
        while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
        if (pos >= line.size()) break;
        if (seen == token_index) return pos;
        while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') ++pos;
        ++seen;
    }
    return line.size();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Model files

inline std::string serialize_model(const CausalModel& m) {
    std::ostringstream os;
    os << "causal-model v1\n";
    for (const auto& name : m.variable_names())
        os << "variable " << name << " " << m.domain(name).to_string() << "\n";
    for (const auto& name : m.variable_names()) {
        const Expr& mech = m.mechanism(name);
        if (mech.kind() == ExprKind::Const)
            os << "default " << name << " " << rat_to_string(mech.value()) << "\n";
    }
    for (const auto& name : m.variable_names()) {
        const Expr& mech = m.mechanism(name);
        if (mech.kind() != ExprKind::Const)
            os << "mechanism " << name << " " << expr_to_string(mech) << "\n";
    }
    os << "end\n";
    return os.str();
}

inline CausalModel parse_model(std::string_view text) {
    detail::LineReader reader(text);
    auto header = reader.next();
    if (!header || detail::split_tokens(*header) != std::vector<std::string>{"causal-model", "v1"})
        detail::fail_at(1, "expected 'causal-model v1' header");

    std::vector<std::pair<std::string, ValueDomain>> variables;
    std::map<std::string, Expr> mechanisms;
    bool ended = false;
    while (auto line = reader.next()) {
        std::size_t ln = reader.current;  // 1-based line number of the consumed line
        auto tokens = detail::split_tokens(*line);
        if (tokens.empty()) continue;
        if (tokens[0] == "end") {
            ended = true;
            break;
        }
        if (tokens[0] == "variable") {
            if (tokens.size() < 3) detail::fail_at(ln, "variable needs a name and a domain");
            variables.emplace_back(tokens[1], detail::parse_domain(ln, tokens, 2));
        } else if (tokens[0] == "default") {
            if (tokens.size() != 3) detail::fail_at(ln, "default needs a name and a value");
            auto v = rat_parse(tokens[2]);
            if (!v)
                detail::fail_at(ln, "malformed rational '" + tokens[2] + "'",
                                detail::keyword_offset(*line, 2) + 1);
            mechanisms.emplace(tokens[1], Expr::constant(*v));
        } else if (tokens[0] == "mechanism") {
            if (tokens.size() < 3) detail::fail_at(ln, "mechanism needs a name and an expression");
            std::size_t off = detail::keyword_offset(*line, 2);
            mechanisms.emplace(tokens[1], detail::parse_expr_at(ln, *line, off));
        } else {
            detail::fail_at(ln, "unknown directive '" + tokens[0] + "'");
        }
    }
    if (!ended) detail::fail_at(reader.lines.size(), "missing 'end'");
    try {
        return CausalModel(std::move(variables), std::move(mechanisms));
    } catch (const std::exception& ex) {
        detail::fail_at(reader.lines.size(), ex.what());
    }
}

// ---------------------------------------------------------------------------
// Interventional files

inline std::string serialize_interventional(const Interventional& iv) {
    std::ostringstream os;
    os << "interventional v1\n";
    bool first_step = true;
    for (const auto& step : iv.steps()) {
        if (!first_step) os << "step\n";
        first_step = false;
        for (const auto& [name, expr] : step.replacements) {
            if (expr.kind() == ExprKind::Const)
                os << "hard " << name << " " << rat_to_string(expr.value()) << "\n";
            else
                os << "replace " << name << " " << expr_to_string(expr) << "\n";
        }
    }
    os << "end\n";
    return os.str();
}

inline Interventional parse_interventional(std::string_view text) {
    detail::LineReader reader(text);
    auto header = reader.next();
    if (!header ||
        detail::split_tokens(*header) != std::vector<std::string>{"interventional", "v1"})
        detail::fail_at(1, "expected 'interventional v1' header");

    std::vector<Interventional> steps;
    std::map<std::string, Expr> current;
    bool ended = false;
    auto flush = [&] {
        if (!current.empty()) {
            steps.push_back(Interventional::replace(current));
            current.clear();
        }
    };
    while (auto line = reader.next()) {
        std::size_t ln = reader.current;
        auto tokens = detail::split_tokens(*line);
        if (tokens[0] == "end") {
            ended = true;
            break;
        }
        if (tokens[0] == "step") {
            flush();
        } else if (tokens[0] == "hard") {
            if (tokens.size() != 3) detail::fail_at(ln, "hard needs a name and a value");
            auto v = rat_parse(tokens[2]);
            if (!v) detail::fail_at(ln, "malformed rational '" + tokens[2] + "'");
            current.emplace(tokens[1], Expr::constant(*v));
        } else if (tokens[0] == "replace") {
            if (tokens.size() < 3) detail::fail_at(ln, "replace needs a name and an expression");
            current.emplace(tokens[1],
                            detail::parse_expr_at(ln, *line, detail::keyword_offset(*line, 2)));
        } else {
            detail::fail_at(ln, "unknown directive '" + tokens[0] + "'");
        }
    }
    if (!ended) detail::fail_at(reader.lines.size(), "missing 'end'");
    flush();
    return Interventional::compose(steps);
}

// ---------------------------------------------------------------------------
// Interchange spec files (depth-1)

inline std::string serialize_interchange(const InterchangeSpec& spec) {
    std::ostringstream os;
    os << "interchange v1\n";
    auto put = [&](const char* key, const Assignment& a) {
        os << key;
        for (const auto& [name, v] : a.values()) os << " " << name << " " << rat_to_string(v);
        os << "\n";
    };
    put("base", spec.base_input);
    put("source", spec.source_input);
    os << "targets";
    for (const auto& t : spec.targets) os << " " << t;
    os << "\nend\n";
    return os.str();
}

inline InterchangeSpec parse_interchange(std::string_view text) {
    detail::LineReader reader(text);
    auto header = reader.next();
    if (!header || detail::split_tokens(*header) != std::vector<std::string>{"interchange", "v1"})
        detail::fail_at(1, "expected 'interchange v1' header");
    InterchangeSpec spec;
    bool ended = false;
    while (auto line = reader.next()) {
        std::size_t ln = reader.current;
        auto tokens = detail::split_tokens(*line);
        if (tokens[0] == "end") {
            ended = true;
            break;
        }
        if (tokens[0] == "base" || tokens[0] == "source") {
            if (tokens.size() % 2 != 1) detail::fail_at(ln, "expected name/value pairs");
            Assignment a;
            for (std::size_t i = 1; i + 1 < tokens.size(); i += 2) {
                auto v = rat_parse(tokens[i + 1]);
                if (!v) detail::fail_at(ln, "malformed rational '" + tokens[i + 1] + "'");
                a.set(tokens[i], *v);
            }
            (tokens[0] == "base" ? spec.base_input : spec.source_input) = std::move(a);
        } else if (tokens[0] == "targets") {
            for (std::size_t i = 1; i < tokens.size(); ++i) spec.targets.push_back(tokens[i]);
        } else {
            detail::fail_at(ln, "unknown directive '" + tokens[0] + "'");
        }
    }
    if (!ended) detail::fail_at(reader.lines.size(), "missing 'end'");
    return spec;
}

// ---------------------------------------------------------------------------
// Alignment files

inline std::string serialize_alignment(const Alignment& a) {
    std::ostringstream os;
    os << "alignment v1\n";
    for (const auto& e : a.entries()) {
        os << "cell " << e.high_var;
        for (const auto& v : e.cell) os << " " << v;
        os << "\n";
        os << "map " << e.high_var << " " << expr_to_string(e.component_map) << "\n";
    }
    os << "end\n";
    return os.str();
}

inline Alignment parse_alignment(std::string_view text) {
    detail::LineReader reader(text);
    auto header = reader.next();
    if (!header || detail::split_tokens(*header) != std::vector<std::string>{"alignment", "v1"})
        detail::fail_at(1, "expected 'alignment v1' header");
    std::vector<AlignedVariable> entries;
    std::map<std::string, std::size_t> index;
    bool ended = false;
    while (auto line = reader.next()) {
        std::size_t ln = reader.current;
        auto tokens = detail::split_tokens(*line);
        if (tokens[0] == "end") {
            ended = true;
            break;
        }
        if (tokens[0] == "cell") {
            if (tokens.size() < 3) detail::fail_at(ln, "cell needs a high variable and members");
            AlignedVariable e;
            e.high_var = tokens[1];
            for (std::size_t i = 2; i < tokens.size(); ++i) e.cell.push_back(tokens[i]);
            index[e.high_var] = entries.size();
            entries.push_back(std::move(e));
        } else if (tokens[0] == "map") {
            if (tokens.size() < 3) detail::fail_at(ln, "map needs a high variable and an expression");
            auto it = index.find(tokens[1]);
            if (it == index.end())
                detail::fail_at(ln, "map before cell for '" + tokens[1] + "'");
            entries[it->second].component_map =
                detail::parse_expr_at(ln, *line, detail::keyword_offset(*line, 2));
        } else {
            detail::fail_at(ln, "unknown directive '" + tokens[0] + "'");
        }
    }
    if (!ended) detail::fail_at(reader.lines.size(), "missing 'end'");
    return Alignment(std::move(entries));
}

// ---------------------------------------------------------------------------
// Translation files

struct ParsedTranslation {
    std::optional<Translation> full;
    struct Block {
        std::vector<std::string> layer;
        RatMatrix matrix;
        double declared_tolerance = 0.0;
    };
    std::optional<Block> rotation_block;
};

inline std::string serialize_translation(const Translation& t) {
    std::ostringstream os;
    os << "translation v1\n";
    for (const auto& [name, dom] : t.source_variables)
        os << "source " << name << " " << dom.to_string() << "\n";
    for (const auto& [name, dom] : t.target_variables)
        os << "target " << name << " " << dom.to_string() << "\n";
    for (const auto& [name, dom] : t.target_variables)
        os << "forward " << name << " " << expr_to_string(t.forward.at(name)) << "\n";
    for (const auto& [name, dom] : t.source_variables)
        os << "inverse " << name << " " << expr_to_string(t.inverse.at(name)) << "\n";
    os << "end\n";
    return os.str();
}

inline ParsedTranslation parse_translation(std::string_view text) {
    detail::LineReader reader(text);
    auto header = reader.next();
    if (!header || detail::split_tokens(*header) != std::vector<std::string>{"translation", "v1"})
        detail::fail_at(1, "expected 'translation v1' header");
    ParsedTranslation out;
    Translation t;
    ParsedTranslation::Block block;
    bool has_block = false, has_full = false, ended = false;
    std::vector<std::vector<Rat>> rows;
    while (auto line = reader.next()) {
        std::size_t ln = reader.current;
        auto tokens = detail::split_tokens(*line);
        if (tokens[0] == "end") {
            ended = true;
            break;
        }
        if (tokens[0] == "source") {
            has_full = true;
            t.source_variables.emplace_back(tokens.at(1), detail::parse_domain(ln, tokens, 2));
        } else if (tokens[0] == "target") {
            has_full = true;
            t.target_variables.emplace_back(tokens.at(1), detail::parse_domain(ln, tokens, 2));
        } else if (tokens[0] == "forward") {
            has_full = true;
            t.forward.emplace(tokens.at(1),
                              detail::parse_expr_at(ln, *line, detail::keyword_offset(*line, 2)));
        } else if (tokens[0] == "inverse") {
            has_full = true;
            t.inverse.emplace(tokens.at(1),
                              detail::parse_expr_at(ln, *line, detail::keyword_offset(*line, 2)));
        } else if (tokens[0] == "rotation-block") {
            has_block = true;
            std::size_t i = 1;
            for (; i < tokens.size() && tokens[i] != "tolerance"; ++i)
                block.layer.push_back(tokens[i]);
            if (i < tokens.size() && tokens[i] == "tolerance") {
                if (i + 1 >= tokens.size()) detail::fail_at(ln, "tolerance needs a value");
                block.declared_tolerance = std::atof(tokens[i + 1].c_str());
            }
        } else if (tokens[0] == "row") {
            std::vector<Rat> row;
            for (std::size_t i = 1; i < tokens.size(); ++i) {
                auto v = rat_parse(tokens[i]);
                if (!v) detail::fail_at(ln, "malformed rational '" + tokens[i] + "'");
                row.push_back(*v);
            }
            rows.push_back(std::move(row));
        } else {
            detail::fail_at(ln, "unknown directive '" + tokens[0] + "'");
        }
    }
    if (!ended) detail::fail_at(reader.lines.size(), "missing 'end'");
    if (has_block && has_full)
        detail::fail_at(1, "translation mixes coordinatewise maps with a rotation block");
    if (has_block) {
        if (rows.size() != block.layer.size())
            detail::fail_at(1, "rotation block needs one row per layer variable");
        RatMatrix m(rows.size(), rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (rows[r].size() != block.layer.size())
                detail::fail_at(1, "rotation block rows must be square");
            for (std::size_t c = 0; c < rows[r].size(); ++c) m.at(r, c) = rows[r][c];
        }
        block.matrix = std::move(m);
        out.rotation_block = std::move(block);
    } else {
        out.full = std::move(t);
    }
    return out;
}

/// Expand a parsed translation against the model it will translate.
inline Translation resolve_translation(const ParsedTranslation& parsed, const CausalModel& model) {
    if (parsed.full) return *parsed.full;
    if (parsed.rotation_block)
        return make_block_translation(model, parsed.rotation_block->layer,
                                      parsed.rotation_block->matrix);
    throw ModelError("empty translation file");
}

// ---------------------------------------------------------------------------
// Weight-matrix files

inline std::string serialize_weights(const std::vector<RatMatrix>& weights) {
    std::ostringstream os;
    os << "weights v1\n";
    for (const auto& w : weights) {
        os << "matrix " << w.rows << " " << w.cols << "\n";
        for (std::size_t r = 0; r < w.rows; ++r) {
            os << "row";
            for (std::size_t c = 0; c < w.cols; ++c) os << " " << rat_to_string(w.at(r, c));
            os << "\n";
        }
    }
    os << "end\n";
    return os.str();
}

inline std::vector<RatMatrix> parse_weights(std::string_view text) {
    detail::LineReader reader(text);
    auto header = reader.next();
    if (!header || detail::split_tokens(*header) != std::vector<std::string>{"weights", "v1"})
        detail::fail_at(1, "expected 'weights v1' header");
    std::vector<RatMatrix> out;
    std::size_t expect_rows = 0, got_rows = 0;
    bool ended = false;
    while (auto line = reader.next()) {
        std::size_t ln = reader.current;
        auto tokens = detail::split_tokens(*line);
        if (tokens[0] == "end") {
            ended = true;
            break;
        }
        if (tokens[0] == "matrix") {
            if (tokens.size() != 3) detail::fail_at(ln, "matrix needs rows and cols");
            if (!out.empty() && got_rows != expect_rows)
                detail::fail_at(ln, "previous matrix is missing rows");
            std::size_t r = std::stoul(tokens[1]), c = std::stoul(tokens[2]);
            out.emplace_back(r, c);
            expect_rows = r;
            got_rows = 0;
        } else if (tokens[0] == "row") {
            if (out.empty()) detail::fail_at(ln, "row before matrix");
            RatMatrix& m = out.back();
            if (got_rows >= expect_rows) detail::fail_at(ln, "too many rows");
            if (tokens.size() - 1 != m.cols)
                detail::fail_at(ln, "expected " + std::to_string(m.cols) + " entries");
            for (std::size_t i = 1; i < tokens.size(); ++i) {
                auto v = rat_parse(tokens[i]);
                if (!v) detail::fail_at(ln, "malformed rational '" + tokens[i] + "'");
                m.at(got_rows, i - 1) = *v;
            }
            ++got_rows;
        } else {
            detail::fail_at(ln, "unknown directive '" + tokens[0] + "'");
        }
    }
    if (!ended) detail::fail_at(reader.lines.size(), "missing 'end'");
    if (!out.empty() && got_rows != expect_rows)
        detail::fail_at(reader.lines.size(), "last matrix is missing rows");
    return out;
}

// ---------------------------------------------------------------------------
// Equality-task files

inline std::string serialize_equality_tasks(
    const std::vector<fixtures::EqualityTaskInstance>& tasks) {
    std::ostringstream os;
    os << "equality-tasks v1\n";
    for (const auto& t : tasks) {
        os << "instance " << (t.label ? 1 : 0) << " " << t.objects.front().size();
        for (const auto& obj : t.objects)
            for (const auto& v : obj) os << " " << rat_to_string(v);
        os << "\n";
    }
    os << "end\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Input-space files: one assignment per line, "inputs v1" header

inline std::string serialize_input_space(const std::vector<Assignment>& inputs) {
    std::ostringstream os;
    os << "inputs v1\n";
    for (const auto& a : inputs) {
        os << "input";
        for (const auto& [name, v] : a.values()) os << " " << name << " " << rat_to_string(v);
        os << "\n";
    }
    os << "end\n";
    return os.str();
}

inline std::vector<Assignment> parse_input_space(std::string_view text) {
    detail::LineReader reader(text);
    auto header = reader.next();
    if (!header || detail::split_tokens(*header) != std::vector<std::string>{"inputs", "v1"})
        detail::fail_at(1, "expected 'inputs v1' header");
    std::vector<Assignment> out;
    bool ended = false;
    while (auto line = reader.next()) {
        std::size_t ln = reader.current;
        auto tokens = detail::split_tokens(*line);
        if (tokens[0] == "end") {
            ended = true;
            break;
        }
        if (tokens[0] != "input") detail::fail_at(ln, "unknown directive '" + tokens[0] + "'");
        if (tokens.size() % 2 != 1) detail::fail_at(ln, "expected name/value pairs");
        Assignment a;
        for (std::size_t i = 1; i + 1 < tokens.size(); i += 2) {
            auto v = rat_parse(tokens[i + 1]);
            if (!v) detail::fail_at(ln, "malformed rational '" + tokens[i + 1] + "'");
            a.set(tokens[i], *v);
        }
        out.push_back(std::move(a));
    }
    if (!ended) detail::fail_at(reader.lines.size(), "missing 'end'");
    return out;
}

// ---------------------------------------------------------------------------
// Audit request files

struct AuditRequest {
    std::string low_path, high_path, alignment_path, vehicle;
    std::optional<Expr> property;
};

inline AuditRequest parse_audit_request(std::string_view text) {
    detail::LineReader reader(text);
    auto header = reader.next();
    if (!header ||
        detail::split_tokens(*header) != std::vector<std::string>{"audit-request", "v1"})
        detail::fail_at(1, "expected 'audit-request v1' header");
    AuditRequest req;
    bool ended = false;
    while (auto line = reader.next()) {
        std::size_t ln = reader.current;
        auto tokens = detail::split_tokens(*line);
        if (tokens[0] == "end") {
            ended = true;
            break;
        }
        if (tokens[0] == "low") req.low_path = tokens.at(1);
        else if (tokens[0] == "high") req.high_path = tokens.at(1);
        else if (tokens[0] == "alignment") req.alignment_path = tokens.at(1);
        else if (tokens[0] == "vehicle") req.vehicle = tokens.at(1);
        else if (tokens[0] == "property")
            req.property = detail::parse_expr_at(ln, *line, detail::keyword_offset(*line, 1));
        else detail::fail_at(ln, "unknown directive '" + tokens[0] + "'");
    }
    if (!ended) detail::fail_at(reader.lines.size(), "missing 'end'");
    return req;
}

// ---------------------------------------------------------------------------
// Files

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

/// Write-then-rename, so readers never see a partial report.
inline void write_file_atomic(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << content;
        if (!out) throw std::runtime_error("write failed for " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot rename " + tmp + " to " + path);
}

}  // namespace causalite
