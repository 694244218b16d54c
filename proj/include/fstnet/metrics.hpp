#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fstnet/check.hpp"
#include "fstnet/image.hpp"

namespace fstnet {

// One scored presentation: spoof probability in [0,1] plus the true label.
struct ScoreRecord {
    std::string id;
    Label label = Label::Live;
    double score = 0.0;
};

namespace detail {

inline void require_both_classes(const std::vector<ScoreRecord>& scores, const char* opname) {
    bool has_live = false, has_spoof = false;
    for (const auto& r : scores) {
        require(std::isfinite(r.score) && r.score >= 0.0 && r.score <= 1.0, opname,
                ": score for ", r.id, " must be finite in [0,1], got ", r.score);
        (r.label == Label::Live ? has_live : has_spoof) = true;
    }
    require(has_live && has_spoof, opname, ": need at least one record of each class");
}

inline std::vector<double> distinct_scores_sorted(const std::vector<ScoreRecord>& scores) {
    std::set<double> s;
    for (const auto& r : scores) s.insert(r.score);
    return {s.begin(), s.end()};
}

}  // namespace detail

// Decision rule: spoof iff score >= threshold.
//   apcer = fraction of spoof presentations decided live
//   bpcer = fraction of live presentations decided spoof
inline std::pair<double, double> apcer_bpcer(const std::vector<ScoreRecord>& scores,
                                             double threshold) {
    detail::require_both_classes(scores, "apcer_bpcer");
    std::size_t spoof_total = 0, spoof_as_live = 0, live_total = 0, live_as_spoof = 0;
    for (const auto& r : scores) {
        const bool decided_spoof = r.score >= threshold;
        if (r.label == Label::Spoof) {
            ++spoof_total;
            if (!decided_spoof) ++spoof_as_live;
        } else {
            ++live_total;
            if (decided_spoof) ++live_as_spoof;
        }
    }
    return {static_cast<double>(spoof_as_live) / static_cast<double>(spoof_total),
            static_cast<double>(live_as_spoof) / static_cast<double>(live_total)};
}

inline double acer(double apcer, double bpcer) {
    require(apcer >= 0.0 && apcer <= 1.0 && bpcer >= 0.0 && bpcer <= 1.0,
            "acer: rates must be in [0,1], got ", apcer, " and ", bpcer);
    return (apcer + bpcer) / 2.0;
}

inline double hter(double frr, double far) {
    require(frr >= 0.0 && frr <= 1.0 && far >= 0.0 && far <= 1.0,
            "hter: rates must be in [0,1], got ", frr, " and ", far);
    return (frr + far) / 2.0;
}

// ROC with spoof as the positive class:
//   tpr(t) = fraction of spoof with score >= t, fpr(t) = same over live.
// For each target, the highest TPR among operating points with FPR <= target
// (thresholds swept over the distinct score values; 0 when none qualifies).
inline std::vector<double> tpr_at_fpr(const std::vector<ScoreRecord>& scores,
                                      const std::vector<double>& fpr_targets) {
    detail::require_both_classes(scores, "tpr_at_fpr");
    for (double t : fpr_targets)
        require(t > 0.0 && t < 1.0, "tpr_at_fpr: targets must be in (0,1), got ", t);

    std::vector<double> out;
    out.reserve(fpr_targets.size());
    const std::vector<double> thresholds = detail::distinct_scores_sorted(scores);
    for (double target : fpr_targets) {
        double best = 0.0;
        for (double th : thresholds) {
            std::size_t tp = 0, fp = 0, pos = 0, neg = 0;
            for (const auto& r : scores) {
                if (r.label == Label::Spoof) {
                    ++pos;
                    if (r.score >= th) ++tp;
                } else {
                    ++neg;
                    if (r.score >= th) ++fp;
                }
            }
            const double fpr = static_cast<double>(fp) / static_cast<double>(neg);
            const double tpr = static_cast<double>(tp) / static_cast<double>(pos);
            if (fpr <= target) best = std::max(best, tpr);
        }
        out.push_back(best);
    }
    return out;
}

// Threshold among the distinct score values minimizing |apcer - bpcer|,
// ties toward the lower threshold; returns (threshold, (apcer+bpcer)/2).
inline std::pair<double, double> eer_threshold(const std::vector<ScoreRecord>& scores) {
    detail::require_both_classes(scores, "eer_threshold");
    const std::vector<double> thresholds = detail::distinct_scores_sorted(scores);
    double best_th = thresholds.front();
    double best_gap = 2.0, best_eer = 1.0;
    for (double th : thresholds) {
        const auto [a, b] = apcer_bpcer(scores, th);
        const double gap = std::abs(a - b);
        if (gap < best_gap) {
            best_gap = gap;
            best_th = th;
            best_eer = (a + b) / 2.0;
        }
    }
    return {best_th, best_eer};
}

struct MetricsReport {
    double apcer = 0.0, bpcer = 0.0, acer = 0.0, hter = 0.0;
    double threshold = 0.5;
    std::vector<std::pair<double, double>> tpr_at_fpr;  // (fpr target, tpr)
};

inline MetricsReport compute_report(const std::vector<ScoreRecord>& scores, double threshold,
                                    const std::vector<double>& fpr_targets = {1e-2, 1e-3}) {
    MetricsReport rep;
    rep.threshold = threshold;
    const auto [a, b] = apcer_bpcer(scores, threshold);
    rep.apcer = a;
    rep.bpcer = b;
    rep.acer = acer(a, b);
    rep.hter = hter(b, a);  // FRR = bpcer, FAR = apcer under this decision rule
    const std::vector<double> tprs = tpr_at_fpr(scores, fpr_targets);
    for (std::size_t i = 0; i < fpr_targets.size(); ++i)
        rep.tpr_at_fpr.emplace_back(fpr_targets[i], tprs[i]);
    return rep;
}

// ---------------------------------------------------------------------------
// file formats

inline void save_scores_csv(const std::filesystem::path& path,
                            const std::vector<ScoreRecord>& scores) {
    std::ofstream os(path, std::ios::trunc);
    require_data(os.good(), "scores: cannot write ", path.string());
    os << "id,label,score\n";
    os.precision(17);
    for (const auto& r : scores) os << r.id << "," << label_name(r.label) << "," << r.score << "\n";
    require_data(os.good(), "scores: write failed for ", path.string());
}

inline std::vector<ScoreRecord> load_scores_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    require_data(is.good(), "scores: cannot open ", path.string());
    std::string line;
    require_data(static_cast<bool>(std::getline(is, line)), "scores: empty file ", path.string());
    require_data(line == "id,label,score", "scores: bad header '", line, "' in ", path.string());
    std::vector<ScoreRecord> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
        require_data(c1 != std::string::npos && c2 != std::string::npos,
                     "scores: malformed line '", line, "' in ", path.string());
        ScoreRecord r;
        r.id = line.substr(0, c1);
        r.label = parse_label(line.substr(c1 + 1, c2 - c1 - 1));
        try {
            r.score = std::stod(line.substr(c2 + 1));
        } catch (const std::exception&) {
            throw DataError("scores: bad score in line '" + line + "' of " + path.string());
        }
        require_data(std::isfinite(r.score) && r.score >= 0.0 && r.score <= 1.0,
                     "scores: score out of [0,1] in line '", line, "'");
        out.push_back(std::move(r));
    }
    return out;
}

inline void write_report(std::ostream& os, const MetricsReport& rep) {
    os.precision(17);
    os << "threshold=" << rep.threshold << "\n"
       << "apcer=" << rep.apcer << "\n"
       << "bpcer=" << rep.bpcer << "\n"
       << "acer=" << rep.acer << "\n"
       << "hter=" << rep.hter << "\n";
    for (const auto& [target, tpr] : rep.tpr_at_fpr) os << "tpr@fpr=" << target << "=" << tpr << "\n";
}

inline void save_report(const std::filesystem::path& path, const MetricsReport& rep) {
    std::ofstream os(path, std::ios::trunc);
    require_data(os.good(), "report: cannot write ", path.string());
    write_report(os, rep);
    require_data(os.good(), "report: write failed for ", path.string());
}

// Operating points swept over the distinct score values, ascending.
inline void save_roc_csv(const std::filesystem::path& path,
                         const std::vector<ScoreRecord>& scores) {
    detail::require_both_classes(scores, "save_roc_csv");
    std::ofstream os(path, std::ios::trunc);
    require_data(os.good(), "roc: cannot write ", path.string());
    os << "threshold,fpr,tpr\n";
    os.precision(17);
    for (double th : detail::distinct_scores_sorted(scores)) {
        std::size_t tp = 0, fp = 0, pos = 0, neg = 0;
        for (const auto& r : scores) {
            if (r.label == Label::Spoof) {
                ++pos;
                if (r.score >= th) ++tp;
            } else {
                ++neg;
                if (r.score >= th) ++fp;
            }
        }
        os << th << "," << static_cast<double>(fp) / static_cast<double>(neg) << ","
           << static_cast<double>(tp) / static_cast<double>(pos) << "\n";
    }
    require_data(os.good(), "roc: write failed for ", path.string());
}

}  // namespace fstnet
