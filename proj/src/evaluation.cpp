#include "cinephase/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "cinephase/errors.hpp"

namespace cinephase {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
        // trim surrounding whitespace
        const auto b = field.find_first_not_of(" \t\r");
        const auto e = field.find_last_not_of(" \t\r");
        fields.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
    }
    return fields;
}

Phase parse_phase(const std::string& s, const std::string& context) {
    std::string up = s;
    std::transform(up.begin(), up.end(), up.begin(), ::toupper);
    if (up == "ED") return Phase::ED;
    if (up == "ES") return Phase::ES;
    throw io_error(context + ": phase must be ED or ES, got \"" + s + "\"");
}

bool is_integer(const std::string& s) {
    return !s.empty() && s.size() <= 9 && s.find_first_not_of("0123456789") == std::string::npos;
}

using PhaseFrames = std::map<std::string, std::array<std::vector<int>, 2>>;

PhaseFrames group_by_source(const AnnotationSet& set) {
    PhaseFrames out;
    for (const Annotation& a : set) {
        out[a.source_id][a.phase == Phase::ED ? 0 : 1].push_back(a.frame);
    }
    for (auto& [id, phases] : out) {
        std::sort(phases[0].begin(), phases[0].end());
        std::sort(phases[1].begin(), phases[1].end());
    }
    return out;
}

}  // namespace

AnnotationSet load_annotations(const std::filesystem::path& csv) {
    std::ifstream in(csv);
    if (!in) {
        throw io_error("failed to read annotations " + csv.string() + ": cannot open file");
    }
    AnnotationSet set;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::vector<std::string> f = split_csv_line(line);
        if (lineno == 1 && f.size() >= 3 && !is_integer(f[2])) continue;  // header
        if (f.size() != 4) {
            throw io_error("failed to read annotations " + csv.string() + ": line " +
                           std::to_string(lineno) + " has " + std::to_string(f.size()) +
                           " fields, expected source_id,phase,frame,reader");
        }
        if (!is_integer(f[2])) {
            throw io_error("failed to read annotations " + csv.string() + ": line " +
                           std::to_string(lineno) + " has a non-integer frame \"" + f[2] + "\"");
        }
        set.push_back({f[0], parse_phase(f[1], csv.string() + ":" + std::to_string(lineno)),
                       std::stoi(f[2]), f[3]});
    }
    return set;
}

std::vector<std::string> reader_labels(const AnnotationSet& set) {
    std::set<std::string> labels;
    for (const Annotation& a : set) labels.insert(a.reader);
    return {labels.begin(), labels.end()};
}

MatchResult match_events(std::vector<int> auto_frames, std::vector<int> ref_frames) {
    std::sort(auto_frames.begin(), auto_frames.end());
    std::sort(ref_frames.begin(), ref_frames.end());
    MatchResult out;
    std::vector<bool> used(auto_frames.size(), false);
    for (const int r : ref_frames) {
        int best = -1;
        long best_dist = std::numeric_limits<long>::max();
        for (std::size_t i = 0; i < auto_frames.size(); ++i) {
            if (used[i]) continue;
            const long dist = std::labs(static_cast<long>(auto_frames[i]) - r);
            if (dist < best_dist) {  // strict keeps the earlier frame on ties
                best_dist = dist;
                best = static_cast<int>(i);
            }
        }
        if (best >= 0) {
            used[best] = true;
            out.pairs.push_back({auto_frames[best], r});
        } else {
            out.unmatched_refs.push_back(r);
        }
    }
    return out;
}

DiffHistogram& DiffHistogram::operator+=(const DiffHistogram& o) {
    for (int i = 0; i < 4; ++i) df[i] += o.df[i];
    overflow += o.overflow;
    unmatched += o.unmatched;
    return *this;
}

DiffHistogram diff_histogram(const MatchResult& match) {
    DiffHistogram hist;
    for (const MatchedPair& p : match.pairs) {
        const int d = p.diff();
        if (d <= 3) {
            ++hist.df[d];
        } else {
            ++hist.overflow;
        }
    }
    hist.unmatched = static_cast<std::int64_t>(match.unmatched_refs.size());
    return hist;
}

double within_k_rate(const DiffHistogram& hist, int k) {
    if (k < 0 || k > 3) {
        throw config_error("within-k rate needs k in 0..3, got " + std::to_string(k));
    }
    const std::int64_t total = hist.total();
    if (total == 0) {
        throw pipeline_error("within-k rate is undefined for an empty histogram");
    }
    std::int64_t hit = 0;
    for (int i = 0; i <= k; ++i) hit += hist.df[i];
    return 100.0 * static_cast<double>(hit) / static_cast<double>(total);
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

AgreementReport compare_annotations(const AnnotationSet& auto_set, const AnnotationSet& ref_set) {
    AgreementReport report;
    const PhaseFrames autos = group_by_source(auto_set);
    const PhaseFrames refs = group_by_source(ref_set);

    for (const auto& [id, phases] : refs) {
        const auto it = autos.find(id);
        if (it == autos.end()) {
            report.warnings.push_back("video " + id + " has annotations but no automatic report");
            continue;
        }
        const DiffHistogram ed = diff_histogram(match_events(it->second[0], phases[0]));
        const DiffHistogram es = diff_histogram(match_events(it->second[1], phases[1]));
        report.ed += ed;
        report.es += es;
    }
    for (const auto& [id, phases] : autos) {
        if (!refs.count(id)) {
            report.warnings.push_back("video " + id + " has an automatic report but no annotations");
        }
    }
    report.overall += report.ed;
    report.overall += report.es;
    return report;
}

double ReaderDelta::average_ed() const {
    return sources_ed > 0 ? static_cast<double>(total_ed) / sources_ed : 0.0;
}

double ReaderDelta::average_es() const {
    return sources_es > 0 ? static_cast<double>(total_es) / sources_es : 0.0;
}

ReaderDelta reader_delta(const AnnotationSet& reader_a, const AnnotationSet& reader_b) {
    ReaderDelta delta;
    const PhaseFrames a = group_by_source(reader_a);
    const PhaseFrames b = group_by_source(reader_b);

    std::set<std::string> all_ids;
    for (const auto& [id, _] : a) all_ids.insert(id);
    for (const auto& [id, _] : b) all_ids.insert(id);

    for (const std::string& id : all_ids) {
        const auto ia = a.find(id);
        const auto ib = b.find(id);
        if (ia == a.end() || ib == b.end()) {
            delta.warnings.push_back("video " + id + " annotated by only one reader; excluded");
            continue;
        }
        for (int ph = 0; ph < 2; ++ph) {
            const std::vector<int>& fa = ia->second[ph];
            const std::vector<int>& fb = ib->second[ph];
            if (fa.empty() && fb.empty()) continue;
            if (fa.size() != fb.size()) {
                delta.warnings.push_back("video " + id + " has mismatched " +
                                         (ph == 0 ? "ED" : "ES") + " event counts between readers (" +
                                         std::to_string(fa.size()) + " vs " +
                                         std::to_string(fb.size()) + "); excluded");
                continue;
            }
            std::int64_t diff = 0;
            for (std::size_t i = 0; i < fa.size(); ++i) {
                diff += std::labs(static_cast<long>(fa[i]) - fb[i]);
            }
            if (ph == 0) {
                ++delta.hist_ed[static_cast<int>(diff)];
                delta.total_ed += diff;
                ++delta.sources_ed;
            } else {
                ++delta.hist_es[static_cast<int>(diff)];
                delta.total_es += diff;
                ++delta.sources_es;
            }
        }
    }
    return delta;
}

std::vector<SweepRow> threshold_sweep(const std::vector<SweepInput>& videos,
                                      const AnnotationSet& ref,
                                      const std::vector<double>& thresholds,
                                      const DetectorConfig& detector, const FlowConfig& flow,
                                      const PhaseConfig& phase, DistanceMode mode) {
    if (thresholds.empty()) {
        throw config_error("threshold sweep needs at least one threshold");
    }
    for (const double t : thresholds) {
        if (!(t > 0.0 && t <= 1.0)) {
            throw config_error("sweep thresholds must be in (0, 1], got " + std::to_string(t));
        }
    }
    const PhaseFrames refs = group_by_source(ref);

    std::vector<SweepRow> rows;
    rows.reserve(thresholds.size());
    for (const double t : thresholds) {
        SweepRow row;
        row.threshold = t;
        DetectorConfig det = detector;
        det.quality_threshold = t;
        for (const SweepInput& video : videos) {
            SweepVideoResult vr;
            vr.source_id = video.source_id;
            try {
                const CornerResponseMap rmap = corner_response(video.seq.frames.at(0), video.roi, det);
                const KeyPointSet points = select_key_points(rmap, det);
                vr.keypoint_count = static_cast<int>(points.size());
                const TrajectoryBundle bundle = track_sequence(video.seq, points, flow);
                const DistanceSeries series = distance_series(bundle, mode);
                const PhaseReport report = detect_phase_events(series, video.seq.fps, phase);
                const auto it = refs.find(video.source_id);
                if (it != refs.end()) {
                    row.ed += diff_histogram(match_events(report.frames_of(Phase::ED), it->second[0]));
                    row.es += diff_histogram(match_events(report.frames_of(Phase::ES), it->second[1]));
                }
                vr.ok = true;
            } catch (const std::exception& e) {
                vr.ok = false;
                vr.error = e.what();
            }
            row.videos.push_back(std::move(vr));
        }
        row.overall += row.ed;
        row.overall += row.es;
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace cinephase
