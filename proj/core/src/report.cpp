#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

#include "lookahead/benchmark.hpp"

namespace lookahead {

using nlohmann::ordered_json;

std::optional<ReportFormat> parse_report_format(std::string_view name) noexcept {
    if (name == "text") {
        return ReportFormat::text;
    }
    if (name == "csv") {
        return ReportFormat::csv;
    }
    if (name == "json") {
        return ReportFormat::json;
    }
    return std::nullopt;
}

std::string format_signed_2dp(double value) {
    if (!std::isfinite(value)) {
        return "nan";
    }
    // Work in hundredths; a fractional part within 1e-9 of one half counts as a tie.
    const double scaled = std::abs(value) * 100.0;
    double whole = std::floor(scaled);
    if (scaled - whole >= 0.5 - 1e-9) {
        whole += 1.0;
    }
    const auto hundredths = static_cast<long long>(whole);
    const bool negative = value < 0.0 && hundredths != 0;
    return fmt::format("{}{}.{:02}", negative ? '-' : '+', hundredths / 100, hundredths % 100);
}

ReportTable report_table(const BenchmarkReport& report) {
    ReportTable table;
    for (const auto& r : report.records) {
        if (r.failed()) {
            table.push_back({r.display_name, r.variant, "FAILED", "FAILED", "FAILED", "FAILED", "FAILED"});
            continue;
        }
        table.push_back({r.display_name, r.variant, format_signed_2dp(r.p1_return_pct), format_signed_2dp(r.p1_alpha_pp),
                         format_signed_2dp(r.p2_return_pct), format_signed_2dp(r.p2_alpha_pp),
                         format_signed_2dp(r.alpha_decay_pp)});
    }
    return table;
}

namespace {

std::string csv_cell(const std::string& cell) {
    if (cell.find_first_of(",\"\n\r") == std::string::npos) {
        return cell;
    }
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

std::string csv_line(std::span<const std::string> cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) {
            out += ',';
        }
        out += csv_cell(cells[i]);
    }
    out += '\n';
    return out;
}

std::string render_text(const BenchmarkReport& report, const ReportTable& table) {
    std::array<std::size_t, 7> width{};
    for (std::size_t c = 0; c < 7; ++c) {
        width[c] = kReportColumns[c].size();
    }
    std::size_t section_width = 0;
    for (const auto& row : table) {
        for (std::size_t c = 0; c < 7; ++c) {
            width[c] = std::max(width[c], row[c].size());
        }
    }
    for (auto w : width) {
        section_width += w;
    }
    section_width += 2 * 6;

    auto format_row = [&](auto&& cell) {
        std::string line;
        for (std::size_t c = 0; c < 7; ++c) {
            const std::string text(cell(c));
            if (c) {
                line += "  ";
            }
            line += c < 2 ? fmt::format("{:<{}}", text, width[c]) : fmt::format("{:>{}}", text, width[c]);
        }
        while (!line.empty() && line.back() == ' ') {
            line.pop_back();
        }
        return line + '\n';
    };
    const std::string rule(section_width, '-');

    std::string out = format_row([](std::size_t c) { return kReportColumns[c]; });
    out += rule + '\n';
    bool agents_started = false;
    out += "QUANT STRATEGIES (Baseline)\n";
    for (std::size_t r = 0; r < table.size(); ++r) {
        if (report.records[r].block == RecordBlock::agent && !agents_started) {
            agents_started = true;
            out += rule + '\n';
            out += "AI MODELS (Agents)\n";
        }
        out += format_row([&](std::size_t c) { return std::string_view(table[r][c]); });
    }
    out += rule + '\n';
    return out;
}

ordered_json number_or_null(const AlphaRecord& r, double v) {
    return r.failed() ? ordered_json(nullptr) : ordered_json(v);
}

std::string render_json(const BenchmarkReport& report) {
    const auto& m = report.metadata;
    ordered_json doc;
    doc["metadata"]["engine_version"] = m.engine_version;
    doc["metadata"]["dataset_sha256"] = m.dataset_sha256;
    doc["metadata"]["config_sha256"] = m.config_sha256;
    doc["metadata"]["seed"] = m.seed;
    doc["metadata"]["initial_capital"] = m.initial_capital;
    doc["metadata"]["periods"] = ordered_json::array();
    for (const auto& p : m.periods) {
        doc["metadata"]["periods"].push_back({{"label", p.label}, {"start", p.start.iso()}, {"end", p.end.iso()}});
    }
    doc["metadata"]["agents"] = ordered_json::array();
    for (const auto& a : m.agents) {
        doc["metadata"]["agents"].push_back({{"label", a.label},
                                             {"kind", a.kind},
                                             {"model", a.model},
                                             {"base_url", a.base_url},
                                             {"temperature", a.temperature}});
    }
    doc["metadata"]["fallbacks"] = ordered_json::array();
    for (const auto& f : m.fallbacks) {
        doc["metadata"]["fallbacks"].push_back({{"label", f.label}, {"period", f.period}, {"date", f.date.iso()}});
    }
    doc["records"] = ordered_json::array();
    for (const auto& r : report.records) {
        ordered_json rec{{"label", r.strategy_label},
                         {"name", r.display_name},
                         {"variant", r.variant},
                         {"block", r.block == RecordBlock::quant ? "quant" : "agent"},
                         {"status", r.failed() ? "failed" : "ok"},
                         {"p1_return_pct", number_or_null(r, r.p1_return_pct)},
                         {"p1_alpha_pp", number_or_null(r, r.p1_alpha_pp)},
                         {"p2_return_pct", number_or_null(r, r.p2_return_pct)},
                         {"p2_alpha_pp", number_or_null(r, r.p2_alpha_pp)},
                         {"alpha_decay_pp", number_or_null(r, r.alpha_decay_pp)}};
        if (r.failed()) {
            rec["error"] = *r.failure;
        }
        doc["records"].push_back(std::move(rec));
    }
    return doc.dump(2) + '\n';
}

}  // namespace

std::string render_table_csv(const ReportTable& table) {
    std::array<std::string, 7> header;
    std::copy(kReportColumns.begin(), kReportColumns.end(), header.begin());
    std::string out = csv_line(header);
    for (const auto& row : table) {
        out += csv_line(row);
    }
    return out;
}

std::string render_report(const BenchmarkReport& report, ReportFormat format) {
    switch (format) {
        case ReportFormat::text:
            return render_text(report, report_table(report));
        case ReportFormat::csv:
            return render_table_csv(report_table(report));
        case ReportFormat::json:
            return render_json(report);
    }
    throw std::logic_error("unhandled report format");
}

ReportTable parse_report_csv(std::string_view csv) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string cell;
    bool quoted = false;
    bool cell_started = false;
    for (std::size_t i = 0; i < csv.size(); ++i) {
        const char c = csv[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < csv.size() && csv[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell += c;
            }
            continue;
        }
        if (c == '"' && !cell_started) {
            quoted = true;
            cell_started = true;
        } else if (c == ',') {
            row.push_back(std::move(cell));
            cell.clear();
            cell_started = false;
        } else if (c == '\n') {
            row.push_back(std::move(cell));
            rows.push_back(std::move(row));
            row.clear();
            cell.clear();
            cell_started = false;
        } else {
            cell += c;
            cell_started = true;
        }
    }
    if (quoted) {
        throw std::invalid_argument("unterminated quoted CSV cell");
    }
    if (cell_started || !row.empty()) {
        throw std::invalid_argument("CSV must end with a newline");
    }
    if (rows.empty()) {
        throw std::invalid_argument("CSV has no header");
    }
    if (rows.front().size() != 7 || !std::equal(rows.front().begin(), rows.front().end(), kReportColumns.begin())) {
        throw std::invalid_argument("CSV header does not match the report columns");
    }
    ReportTable table;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != 7) {
            throw std::invalid_argument(fmt::format("CSV row {} has {} cells, expected 7", r + 1, rows[r].size()));
        }
        std::array<std::string, 7> cells;
        std::move(rows[r].begin(), rows[r].end(), cells.begin());
        table.push_back(std::move(cells));
    }
    return table;
}

}  // namespace lookahead
