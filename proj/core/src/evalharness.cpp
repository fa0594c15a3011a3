#include "bahith/evalharness.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace bahith::eval {

namespace {

using nlohmann::json;

std::string pct(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f%%", fraction * 100.0);
    return buf;
}

constexpr rag::Difficulty kLevels[] = {rag::Difficulty::Beginner, rag::Difficulty::Intermediate,
                                       rag::Difficulty::Advanced, rag::Difficulty::Unspecified};

}  // namespace

Verdict make_verdict(const rag::McqItem& item, std::optional<char> predicted) {
    if (!item.gold) {
        throw std::invalid_argument("verdict for item '" + item.id + "': no gold label");
    }
    Verdict v;
    v.item_id = item.id;
    v.predicted = predicted;
    v.gold = *item.gold;
    v.correct = predicted.has_value() && *predicted == *item.gold;
    v.difficulty = item.difficulty;
    return v;
}

// ---------------------------------------------------------------------------
// Dataset
// ---------------------------------------------------------------------------

std::vector<rag::McqItem> parse_dataset(std::string_view text, bool require_gold) {
    std::vector<rag::McqItem> out;
    std::unordered_set<std::string> ids;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t record_no = 0;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        ++record_no;
        const std::string where = "dataset record " + std::to_string(record_no) + " (line " +
                                  std::to_string(line_no) + ")";
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw std::runtime_error(where + ": bad JSON: " + e.what());
        }
        rag::McqItem item;
        try {
            item.id = rec.at("id").get<std::string>();
            item.question = rec.at("question").get<std::string>();
            for (const auto& [letter, text_v] : rec.at("options").items()) {
                if (letter.size() != 1) {
                    throw std::runtime_error("option letter '" + letter +
                                             "' must be a single character");
                }
                item.options.emplace_back(letter[0], text_v.get<std::string>());
            }
        } catch (const json::exception& e) {
            throw std::runtime_error(where + ": missing or malformed field: " + e.what());
        }
        if (rec.contains("answer") && !rec.at("answer").is_null()) {
            const auto gold = rec.at("answer").get<std::string>();
            if (gold.size() != 1) {
                throw std::runtime_error(where + ": answer '" + gold +
                                         "' must be a single letter");
            }
            item.gold = gold[0];
        } else if (require_gold) {
            throw std::runtime_error(where + ": missing 'answer' in labeled mode");
        }
        if (rec.contains("level") && !rec.at("level").is_null()) {
            item.difficulty = rag::difficulty_from_string(rec.at("level").get<std::string>());
        }
        try {
            item.validate();
        } catch (const std::exception& e) {
            throw std::runtime_error(where + ": " + e.what());
        }
        if (!ids.insert(item.id).second) {
            throw std::runtime_error(where + ": duplicate item id '" + item.id + "'");
        }
        out.push_back(std::move(item));
    }
    return out;
}

std::vector<rag::McqItem> load_dataset(const std::string& path, bool require_gold) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open dataset: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_dataset(ss.str(), require_gold);
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

EvalReport evaluate(const std::vector<Verdict>& verdicts, std::string config_digest) {
    if (verdicts.empty()) throw std::invalid_argument("evaluate: empty verdict set");

    EvalReport report;
    report.config_digest = std::move(config_digest);
    report.verdicts = verdicts;
    report.total = verdicts.size();
    for (const auto& v : verdicts) {
        auto& bucket = report.buckets[v.difficulty];
        ++bucket.count;
        if (v.correct) {
            ++bucket.correct;
            ++report.correct;
        }
        if (!v.predicted) ++report.invalid;
    }
    for (auto& [_, bucket] : report.buckets) {
        bucket.accuracy = static_cast<double>(bucket.correct) / static_cast<double>(bucket.count);
    }
    report.overall_accuracy =
        static_cast<double>(report.correct) / static_cast<double>(report.total);
    return report;
}

CompareSummary compare_runs(const EvalReport& a, const EvalReport& b) {
    std::unordered_map<std::string, const Verdict*> a_by_id;
    for (const auto& v : a.verdicts) a_by_id.emplace(v.item_id, &v);
    if (a.verdicts.size() != b.verdicts.size() || a_by_id.size() != a.verdicts.size()) {
        throw std::invalid_argument("compare: reports cover different item sets");
    }

    CompareSummary out;
    out.overall_delta = b.overall_accuracy - a.overall_accuracy;
    for (const auto& vb : b.verdicts) {
        auto it = a_by_id.find(vb.item_id);
        if (it == a_by_id.end()) {
            throw std::invalid_argument("compare: item '" + vb.item_id +
                                        "' missing from first report");
        }
        const Verdict& va = *it->second;
        if (!va.correct && vb.correct) out.fixed.push_back(vb.item_id);
        if (va.correct && !vb.correct) out.broken.push_back(vb.item_id);
    }
    std::sort(out.fixed.begin(), out.fixed.end());
    std::sort(out.broken.begin(), out.broken.end());

    for (const auto& [level, bucket_b] : b.buckets) {
        auto it = a.buckets.find(level);
        if (it == a.buckets.end()) {
            throw std::invalid_argument("compare: difficulty buckets differ between reports");
        }
        out.bucket_delta[level] = bucket_b.accuracy - it->second.accuracy;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

std::string render_report(const EvalReport& report) {
    std::ostringstream out;
    out << "items: " << report.total << "  correct: " << report.correct
        << "  invalid: " << report.invalid << "\n";
    out << "overall accuracy: " << pct(report.overall_accuracy) << "\n";

    std::string by_level;
    for (rag::Difficulty level : kLevels) {
        auto it = report.buckets.find(level);
        if (it == report.buckets.end()) continue;
        if (!by_level.empty()) by_level += " / ";
        by_level += std::string(rag::to_string(level)) + " " + pct(it->second.accuracy);
    }
    out << "by difficulty: " << by_level << " / overall " << pct(report.overall_accuracy)
        << "\n";

    out << "\nlevel          count  correct  accuracy\n";
    for (rag::Difficulty level : kLevels) {
        auto it = report.buckets.find(level);
        if (it == report.buckets.end()) continue;
        char row[96];
        std::snprintf(row, sizeof row, "%-13s %6zu %8zu %9s\n", rag::to_string(level),
                      it->second.count, it->second.correct, pct(it->second.accuracy).c_str());
        out << row;
    }
    if (!report.config_digest.empty()) out << "\nconfig digest: " << report.config_digest << "\n";
    return out.str();
}

std::string render_compare(const CompareSummary& summary) {
    std::ostringstream out;
    char line[96];
    std::snprintf(line, sizeof line, "overall delta: %+.1f points\n",
                  summary.overall_delta * 100.0);
    out << line;
    for (const auto& [level, delta] : summary.bucket_delta) {
        std::snprintf(line, sizeof line, "%-13s %+.1f points\n", rag::to_string(level),
                      delta * 100.0);
        out << line;
    }
    out << "fixed (a wrong -> b right): " << summary.fixed.size() << "\n";
    for (const auto& id : summary.fixed) out << "  + " << id << "\n";
    out << "broken (a right -> b wrong): " << summary.broken.size() << "\n";
    for (const auto& id : summary.broken) out << "  - " << id << "\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Report files
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kReportFormat = "bahith-report";
constexpr int kReportVersion = 1;

}  // namespace

std::string report_to_json(const EvalReport& report) {
    json buckets = json::object();
    for (const auto& [level, bucket] : report.buckets) {
        buckets[rag::to_string(level)] = {
            {"count", bucket.count}, {"correct", bucket.correct}, {"accuracy", bucket.accuracy}};
    }
    json verdicts = json::array();
    for (const auto& v : report.verdicts) {
        verdicts.push_back({{"id", v.item_id},
                            {"predicted", v.predicted ? std::string(1, *v.predicted) : ""},
                            {"gold", std::string(1, v.gold)},
                            {"correct", v.correct},
                            {"level", rag::to_string(v.difficulty)}});
    }
    json j{{"format", kReportFormat},
           {"version", kReportVersion},
           {"config_digest", report.config_digest},
           {"total", report.total},
           {"correct", report.correct},
           {"invalid", report.invalid},
           {"overall_accuracy", report.overall_accuracy},
           {"buckets", buckets},
           {"verdicts", verdicts}};
    return j.dump(2) + "\n";
}

EvalReport report_from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("report: bad JSON: ") + e.what());
    }
    if (j.value("format", "") != kReportFormat || j.value("version", -1) != kReportVersion) {
        throw std::runtime_error("report: not a recognized report file");
    }
    EvalReport report;
    report.config_digest = j.value("config_digest", "");
    report.total = j.at("total").get<std::size_t>();
    report.correct = j.at("correct").get<std::size_t>();
    report.invalid = j.at("invalid").get<std::size_t>();
    report.overall_accuracy = j.at("overall_accuracy").get<double>();
    for (const auto& [name, bucket] : j.at("buckets").items()) {
        BucketStats stats;
        stats.count = bucket.at("count").get<std::size_t>();
        stats.correct = bucket.at("correct").get<std::size_t>();
        stats.accuracy = bucket.at("accuracy").get<double>();
        report.buckets[rag::difficulty_from_string(name)] = stats;
    }
    for (const auto& v : j.at("verdicts")) {
        Verdict verdict;
        verdict.item_id = v.at("id").get<std::string>();
        const auto pred = v.at("predicted").get<std::string>();
        if (!pred.empty()) verdict.predicted = pred[0];
        verdict.gold = v.at("gold").get<std::string>()[0];
        verdict.correct = v.at("correct").get<bool>();
        verdict.difficulty = rag::difficulty_from_string(v.at("level").get<std::string>());
        report.verdicts.push_back(std::move(verdict));
    }
    return report;
}

void save_report(const EvalReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write report: " + path);
    const std::string text = report_to_json(report);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error("write failed for report: " + path);
}

EvalReport load_report(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open report: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return report_from_json(ss.str());
}

}  // namespace bahith::eval
