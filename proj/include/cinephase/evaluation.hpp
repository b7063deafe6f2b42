#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cinephase/corners.hpp"
#include "cinephase/pyramid_flow.hpp"
#include "cinephase/trajectory_phase.hpp"

namespace cinephase {

struct Annotation {
    std::string source_id;
    Phase phase = Phase::ED;
    int frame = 0;
    std::string reader;
};

using AnnotationSet = std::vector<Annotation>;

/// Parses `source_id,phase,frame,reader` rows; a leading header line is skipped.
AnnotationSet load_annotations(const std::filesystem::path& csv);

/// Readers present in the set, sorted.
std::vector<std::string> reader_labels(const AnnotationSet& set);

struct MatchedPair {
    int auto_frame = 0;
    int ref_frame = 0;
    int diff() const { return auto_frame >= ref_frame ? auto_frame - ref_frame : ref_frame - auto_frame; }
};

struct MatchResult {
    std::vector<MatchedPair> pairs;
    std::vector<int> unmatched_refs;
};

/// Greedy pairing in ascending reference order: each reference event takes the
/// nearest unpaired automatic event (tie -> earlier automatic frame).
MatchResult match_events(std::vector<int> auto_frames, std::vector<int> ref_frames);

/// Frame-difference histogram: DF0..DF3 buckets plus explicit overflow (>3)
/// and unmatched counts; buckets always sum to the reference-event count.
struct DiffHistogram {
    std::array<std::int64_t, 4> df{};
    std::int64_t overflow = 0;
    std::int64_t unmatched = 0;

    std::int64_t total() const { return df[0] + df[1] + df[2] + df[3] + overflow + unmatched; }
    DiffHistogram& operator+=(const DiffHistogram& o);
};

DiffHistogram diff_histogram(const MatchResult& match);

/// 100 * (sum of DF0..DFk) / total, full precision. k must be in 0..3 and the
/// histogram non-empty.
double within_k_rate(const DiffHistogram& hist, int k);

/// Rounds to 2 decimals, the precision used in reports.
double round2(double v);

struct AgreementReport {
    DiffHistogram ed;
    DiffHistogram es;
    DiffHistogram overall;
    std::vector<std::string> warnings;
};

/// Compares automatic events against reference annotations, grouped by
/// source_id and phase. Videos present on only one side are warned and skipped.
AgreementReport compare_annotations(const AnnotationSet& auto_set, const AnnotationSet& ref_set);

/// Inter-reader agreement in the shape of a per-phase difference table.
struct ReaderDelta {
    std::map<int, int> hist_ed;  ///< per-source ED difference -> number of sources
    std::map<int, int> hist_es;
    std::int64_t total_ed = 0;
    std::int64_t total_es = 0;
    int sources_ed = 0;
    int sources_es = 0;
    std::vector<std::string> warnings;

    double average_ed() const;
    double average_es() const;
};

ReaderDelta reader_delta(const AnnotationSet& reader_a, const AnnotationSet& reader_b);

/// One video of a threshold-sweep corpus.
struct SweepInput {
    std::string source_id;
    FrameSequence seq;
    Roi roi;
};

struct SweepVideoResult {
    std::string source_id;
    int keypoint_count = 0;
    bool ok = false;
    std::string error;
};

struct SweepRow {
    double threshold = 0.0;
    DiffHistogram ed;
    DiffHistogram es;
    DiffHistogram overall;
    std::vector<SweepVideoResult> videos;
};

/// Runs the full detection/tracking/phase pipeline once per threshold per video
/// and histograms the event differences against the reference annotations.
/// A video that fails is reported in its row, never silently dropped.
std::vector<SweepRow> threshold_sweep(const std::vector<SweepInput>& videos,
                                      const AnnotationSet& ref,
                                      const std::vector<double>& thresholds,
                                      const DetectorConfig& detector, const FlowConfig& flow,
                                      const PhaseConfig& phase,
                                      DistanceMode mode = DistanceMode::Origin);

}  // namespace cinephase
