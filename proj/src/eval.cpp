// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The kgrerank Authors

#include "kgrerank/eval.hpp"

#include <fstream>
#include <ostream>
#include <unordered_map>

#include <fmt/format.h>

namespace kgrerank {

void FeatureStore::insert(EntityId item, const FeatureVector& v) {
    if ((v.array() < 0.0).any() || (v.array() > 1.0).any() || !v.allFinite()) {
        throw Error(fmt::format("feature vector of '{}' has components outside [0, 1]", item));
    }
    if (v.isZero(0.0)) throw Error(fmt::format("feature vector of '{}' is all zero", item));
    features_.insert_or_assign(std::move(item), v);
}

const FeatureVector& FeatureStore::at(std::string_view item) const {
    auto it = features_.find(item);
    if (it == features_.end()) throw NotFoundError(fmt::format("item '{}' has no feature vector", item));
    return it->second;
}

Eigen::Matrix<double, kFeatureDims, Eigen::Dynamic> FeatureStore::gather(std::span<const EntityId> items) const {
    Eigen::Matrix<double, kFeatureDims, Eigen::Dynamic> m(kFeatureDims, static_cast<Eigen::Index>(items.size()));
    for (std::size_t i = 0; i < items.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = at(items[i]);
    return m;
}

double ild(std::span<const EntityId> items, const FeatureStore& features) { return ild(features.gather(items)); }

double unexpectedness(std::span<const EntityId> history, std::span<const EntityId> recs, const FeatureStore& features) {
    return unexpectedness(features.gather(history), features.gather(recs));
}

double ndcg_at_k(std::span<const EntityId> base, std::span<const EntityId> reranked, std::size_t k) {
    if (k < 1) throw Error("nDCG cut-off must be at least 1");
    std::unordered_map<std::string_view, double> relevance;
    const std::size_t judged = std::min(k, base.size());
    for (std::size_t r = 0; r < judged; ++r) relevance.emplace(base[r], static_cast<double>(k - r));

    double ideal = 0.0;
    for (std::size_t r = 0; r < judged; ++r) ideal += static_cast<double>(k - r) / std::log2(static_cast<double>(r + 2));
    if (ideal == 0.0) return 0.0;

    double dcg = 0.0;
    const std::size_t shown = std::min(k, reranked.size());
    for (std::size_t i = 0; i < shown; ++i) {
        auto it = relevance.find(reranked[i]);
        if (it != relevance.end()) dcg += it->second / std::log2(static_cast<double>(i + 2));
    }
    return dcg / ideal;
}

double ndcg_at_k(const RecommendationList& base, std::span<const RankedItem> reranked, std::size_t k) {
    const auto b = item_ids(base);
    const auto r = item_ids(reranked);
    return ndcg_at_k(b, r, k);
}

std::vector<EntityId> item_ids(const RecommendationList& list, std::size_t limit) {
    std::vector<EntityId> out;
    for (std::size_t i = 0; i < list.items.size() && i < limit; ++i) out.push_back(list.items[i].item);
    return out;
}

std::vector<EntityId> item_ids(std::span<const RankedItem> list, std::size_t limit) {
    std::vector<EntityId> out;
    for (std::size_t i = 0; i < list.size() && i < limit; ++i) out.push_back(list[i].item);
    return out;
}

// ---------------------------------------------------------------------------
// Reports

namespace {

std::string field(const std::optional<double>& v) { return v ? fmt::format("{:.10f}", *v) : std::string(); }

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

}  // namespace

void write_report(std::ostream& out, std::span<const ReportRow> rows) {
    out << "user,metric,order,ild,unexpectedness,ndcg10\n";
    for (const ReportRow& r : rows) {
        out << csv_escape(r.user) << ',' << csv_escape(r.metric) << ',' << csv_escape(r.order) << ',' << field(r.ild)
            << ',' << field(r.unexpectedness) << ',' << field(r.ndcg10) << '\n';
    }
}

void write_report_summary(std::ostream& out, std::span<const ReportRow> rows) {
    struct Acc {
        std::size_t users = 0;
        double sum[3] = {0, 0, 0};
        std::size_t count[3] = {0, 0, 0};
    };
    std::vector<std::pair<std::string, std::string>> order;
    std::map<std::pair<std::string, std::string>, Acc> acc;
    for (const ReportRow& r : rows) {
        const auto key = std::make_pair(r.metric, r.order);
        auto [it, inserted] = acc.try_emplace(key);
        if (inserted) order.push_back(key);
        Acc& a = it->second;
        ++a.users;
        const std::optional<double>* values[3] = {&r.ild, &r.unexpectedness, &r.ndcg10};
        for (int i = 0; i < 3; ++i) {
            if (*values[i]) {
                a.sum[i] += **values[i];
                ++a.count[i];
            }
        }
    }
    out << "metric,order,users,ild,unexpectedness,ndcg10\n";
    for (const auto& key : order) {
        const Acc& a = acc.at(key);
        out << csv_escape(key.first) << ',' << csv_escape(key.second) << ',' << a.users;
        for (int i = 0; i < 3; ++i) {
            out << ',' << (a.count[i] ? field(a.sum[i] / static_cast<double>(a.count[i])) : std::string());
        }
        out << '\n';
    }
}

void emit_report(std::span<const ReportRow> rows, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto open = [](const std::filesystem::path& p) {
        std::ofstream f(p, std::ios::binary);
        if (!f) throw Error(fmt::format("cannot write '{}'", p.string()));
        return f;
    };
    {
        auto f = open(dir / "report.csv");
        write_report(f, rows);
        if (!f.flush()) throw Error("failed writing report.csv");
    }
    auto f = open(dir / "report_summary.csv");
    write_report_summary(f, rows);
    if (!f.flush()) throw Error("failed writing report_summary.csv");
}

void write_qrels(std::ostream& out, const std::map<std::string, RecommendationList>& base, std::size_t k) {
    for (const auto& [user, list] : base) {
        for (std::size_t r = 0; r < list.items.size() && r < k; ++r) {
            out << user << " 0 " << list.items[r].item << ' ' << (k - r) << '\n';
        }
    }
}

void write_trec_run(std::ostream& out, const std::string& user, std::span<const EntityId> items, const std::string& tag) {
    for (std::size_t i = 0; i < items.size(); ++i) {
        out << user << " Q0 " << items[i] << ' ' << (i + 1) << ' ' << (items.size() - i) << ' ' << tag << '\n';
    }
}

}  // namespace kgrerank
