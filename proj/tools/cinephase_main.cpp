#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cinephase/errors.hpp"
#include "cinephase/evaluation.hpp"
#include "cinephase/frame_io.hpp"
#include "cinephase/pipeline.hpp"
#include "cinephase/synth.hpp"

namespace fs = std::filesystem;
using namespace cinephase;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBadArgs = 2;
constexpr int kExitInput = 3;
constexpr int kExitPipeline = 4;

Roi parse_roi(const std::string& text) {
    std::stringstream ss(text);
    std::vector<int> vals;
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t pos = 0;
            vals.push_back(std::stoi(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw config_error("bad --roi value \"" + text + "\": expected x0,y0,w,h integers");
        }
    }
    if (vals.size() != 4) {
        throw config_error("bad --roi value \"" + text + "\": expected 4 integers, got " +
                           std::to_string(vals.size()));
    }
    return {vals[0], vals[1], vals[2], vals[3]};
}

std::vector<double> parse_thresholds(const std::string& text) {
    std::stringstream ss(text);
    std::vector<double> vals;
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t pos = 0;
            vals.push_back(std::stod(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw config_error("bad --thresholds value \"" + text + "\"");
        }
    }
    return vals;
}

DistanceMode parse_mode(const std::string& text) {
    if (text == "origin") return DistanceMode::Origin;
    if (text == "anchored") return DistanceMode::Anchored;
    throw config_error("bad --distance-mode \"" + text + "\": expected origin or anchored");
}

void print_timings(const std::vector<StageTiming>& timings) {
    std::cerr << std::fixed << std::setprecision(3);
    for (const StageTiming& t : timings) {
        std::cerr << "[time] " << t.stage << " " << t.seconds << " s\n";
    }
    std::cerr.unsetf(std::ios::fixed);
}

std::string hist_row(const DiffHistogram& h) {
    const auto pct = [&](std::int64_t c) -> std::string {
        if (h.total() == 0) return "n/a";
        std::ostringstream os;
        os << std::fixed << std::setprecision(2)
           << 100.0 * static_cast<double>(c) / static_cast<double>(h.total()) << "%";
        return os.str();
    };
    std::ostringstream os;
    for (int i = 0; i < 4; ++i) {
        os << h.df[i] << " (" << pct(h.df[i]) << ")";
        os << (i < 3 ? "\t" : "");
    }
    if (h.overflow > 0) os << "\t>3: " << h.overflow;
    if (h.unmatched > 0) os << "\tunmatched: " << h.unmatched;
    return os.str();
}

// --- subcommands -------------------------------------------------------------

struct PipelineFlags {
    std::string frames_dir;
    std::optional<double> fps;
    std::string roi_text;
    int start_frame = 0;
    double threshold = 0.8;
    int max_points = 100;
    double min_distance = 10.0;
    int omega = 10;
    int levels = 3;
    int max_iters = 30;
    double min_step = 0.01;
    std::optional<int> min_spacing;
    int smooth = 1;
    std::string distance_mode = "origin";

    RunConfig to_config() const {
        RunConfig cfg;
        cfg.frames_dir = frames_dir;
        cfg.fps = fps;
        if (!roi_text.empty()) cfg.roi = parse_roi(roi_text);
        cfg.start_frame = start_frame;
        cfg.detector.quality_threshold = threshold;
        cfg.detector.max_points = max_points;
        cfg.detector.min_distance = min_distance;
        cfg.flow.omega = omega;
        cfg.flow.num_levels = levels;
        cfg.flow.max_iterations = max_iters;
        cfg.flow.min_step = min_step;
        cfg.phase.min_spacing = min_spacing;
        cfg.phase.smooth_window = smooth;
        cfg.distance_mode = parse_mode(distance_mode);
        cfg.validate();
        return cfg;
    }
};

void add_pipeline_flags(CLI::App* cmd, PipelineFlags& f, bool roi_required) {
    cmd->add_option("--frames", f.frames_dir, "Directory of <digits>.pgm|png frames")->required();
    cmd->add_option("--fps", f.fps, "Frames per second (default 15)");
    auto* roi = cmd->add_option("--roi", f.roi_text, "Region of interest x0,y0,w,h");
    if (roi_required) roi->required();
    cmd->add_option("--start-frame", f.start_frame, "Detection frame index (default 0)");
    cmd->add_option("--threshold", f.threshold, "Key-point quality threshold in (0,1], default 0.8");
    cmd->add_option("--max-points", f.max_points, "Maximum key points, default 100");
    cmd->add_option("--min-distance", f.min_distance, "Minimum key-point spacing in px, default 10");
    cmd->add_option("--omega", f.omega, "Tracking half-window, default 10 (21x21 kernel)");
    cmd->add_option("--levels", f.levels, "Pyramid levels 1..4, default 3");
    cmd->add_option("--max-iters", f.max_iters, "Per-level solver iterations, default 30");
    cmd->add_option("--min-step", f.min_step, "Solver convergence step in px, default 0.01");
    cmd->add_option("--min-spacing", f.min_spacing,
                    "Minimum frames between same-phase events, default ceil(0.35*fps)");
    cmd->add_option("--smooth", f.smooth, "Odd moving-average width for detection, default 1 (off)");
    cmd->add_option("--distance-mode", f.distance_mode, "origin|anchored, default origin");
}

int cmd_preview(const std::string& frames_dir, std::optional<double> fps, const std::string& out) {
    const FrameSequence seq = load_sequence(frames_dir, fps);
    export_preview(seq, out);
    std::cout << "wrote " << out << " (" << seq.width() << "x" << seq.height() << ", frame 0 of "
              << seq.num_frames() << ")\n";
    return kExitOk;
}

int cmd_phases(const PipelineFlags& flags, const std::string& out_dir) {
    const RunConfig cfg = flags.to_config();
    fs::create_directories(out_dir);

    const PhasesResult result = run_phases_from_dir(cfg);
    write_phase_report(result, fs::path(out_dir) / "report.json");
    write_trajectory_csv(result.bundle, result.start_frame, fs::path(out_dir) / "trajectory.csv");
    write_keypoints_csv(result.keypoints, fs::path(out_dir) / "keypoints.csv");
    write_series_csv(result.report.series, result.start_frame, fs::path(out_dir) / "d_series.csv");

    std::cout << "source " << result.source_id << ": " << result.keypoints.size() << " key points, "
              << result.bundle.num_frames << " frames\n";
    const auto print_frames = [](const char* label, const std::vector<int>& frames) {
        std::cout << label << ":";
        for (const int f : frames) std::cout << " " << f;
        std::cout << "\n";
    };
    print_frames("ED frames", result.report.frames_of(Phase::ED));
    print_frames("ES frames", result.report.frames_of(Phase::ES));
    for (const std::string& w : result.report.warnings) std::cout << "warning: " << w << "\n";
    print_timings(result.timings);
    return kExitOk;
}

int cmd_synth(const SynthConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    fs::create_directories(out_dir);
    const auto [seq, gt] = generate_cine(cfg);

    for (int n = 0; n < seq.num_frames(); ++n) {
        std::ostringstream name;
        name << std::setw(3) << std::setfill('0') << n << ".pgm";
        write_pgm(seq.frames[n], fs::path(out_dir) / name.str());
    }
    {
        std::ofstream gt_out(fs::path(out_dir) / "gt.csv");
        gt_out << "phase,frame\n";
        for (const int f : gt.ed_frames) gt_out << "ED," << f << "\n";
        for (const int f : gt.es_frames) gt_out << "ES," << f << "\n";
    }
    {
        const Roi roi = suggested_roi(cfg);
        std::ofstream roi_out(fs::path(out_dir) / "roi.txt");
        roi_out << roi.x0 << "," << roi.y0 << "," << roi.w << "," << roi.h << "\n";
    }
    std::cout << "wrote " << seq.num_frames() << " frames, " << gt.ed_frames.size() << " ED and "
              << gt.es_frames.size() << " ES ground-truth events to " << out_dir << "\n";
    return kExitOk;
}

int cmd_eval(const std::vector<std::string>& auto_files, const std::string& ref_file, int k,
             std::string reader, const std::string& delta_readers, const std::string& out_csv) {
    const AnnotationSet ref_all = load_annotations(ref_file);

    if (!delta_readers.empty()) {
        const auto comma = delta_readers.find(',');
        if (comma == std::string::npos) {
            throw config_error("--delta-readers expects two labels: A,B");
        }
        const std::string ra = delta_readers.substr(0, comma);
        const std::string rb = delta_readers.substr(comma + 1);
        AnnotationSet a, b;
        for (const Annotation& ann : ref_all) {
            if (ann.reader == ra) a.push_back(ann);
            if (ann.reader == rb) b.push_back(ann);
        }
        if (a.empty() || b.empty()) {
            throw io_error("no annotations for reader \"" + (a.empty() ? ra : rb) + "\"");
        }
        const ReaderDelta delta = reader_delta(a, b);
        std::cout << "Inter-reader differences (" << ra << " vs " << rb << ")\n";
        std::cout << "diff\tED sources\tES sources\n";
        std::map<int, std::pair<int, int>> rows;
        for (const auto& [d, c] : delta.hist_ed) rows[d].first = c;
        for (const auto& [d, c] : delta.hist_es) rows[d].second = c;
        for (const auto& [d, counts] : rows) {
            std::cout << d << "\t" << counts.first << "\t" << counts.second << "\n";
        }
        std::cout << "total\t" << delta.total_ed << "\t" << delta.total_es << "\n";
        std::cout << std::fixed << std::setprecision(2) << "average\t" << delta.average_ed() << "\t"
                  << delta.average_es() << "\n";
        for (const std::string& w : delta.warnings) std::cout << "warning: " << w << "\n";
        return kExitOk;
    }

    if (auto_files.empty()) {
        throw config_error("--auto report files are required unless --delta-readers is given");
    }
    AnnotationSet autos;
    for (const std::string& f : auto_files) {
        const AnnotationSet events = load_phase_report_events(f);
        autos.insert(autos.end(), events.begin(), events.end());
    }
    AnnotationSet ref;
    const std::vector<std::string> labels = reader_labels(ref_all);
    if (reader.empty()) {
        if (labels.size() > 1) {
            std::string all;
            for (const std::string& l : labels) all += (all.empty() ? "" : ", ") + l;
            throw config_error("annotations contain several readers (" + all +
                               "); pick one with --reader");
        }
        reader = labels.front();
    }
    for (const Annotation& a : ref_all) {
        if (a.reader == reader) ref.push_back(a);
    }
    if (ref.empty()) {
        throw io_error("no annotations for reader \"" + reader + "\"");
    }

    const AgreementReport report = compare_annotations(autos, ref);
    std::cout << "Agreement vs reader \"" << reader << "\" (DF0..DF3)\n";
    std::cout << "ED\t" << hist_row(report.ed) << "\n";
    std::cout << "ES\t" << hist_row(report.es) << "\n";
    std::cout << "Overall\t" << hist_row(report.overall) << "\n";
    std::cout << std::fixed << std::setprecision(2);
    std::cout << "within-" << k << " ED: " << round2(within_k_rate(report.ed, k))
              << "%  ES: " << round2(within_k_rate(report.es, k))
              << "%  overall: " << round2(within_k_rate(report.overall, k)) << "%\n";
    for (const std::string& w : report.warnings) std::cout << "warning: " << w << "\n";

    if (!out_csv.empty()) {
        std::ofstream out(out_csv);
        if (!out) throw io_error("failed to write " + out_csv);
        out << "scope,df0,df1,df2,df3,overflow,unmatched,within_k\n";
        const auto row = [&](const char* scope, const DiffHistogram& h) {
            out << scope << ',' << h.df[0] << ',' << h.df[1] << ',' << h.df[2] << ',' << h.df[3]
                << ',' << h.overflow << ',' << h.unmatched << ',' << round2(within_k_rate(h, k))
                << '\n';
        };
        row("ED", report.ed);
        row("ES", report.es);
        row("overall", report.overall);
    }
    return kExitOk;
}

int cmd_sweep(const std::string& corpus_dir, const std::string& thresholds_text,
              const std::string& ref_file, const std::string& roi_text,
              const PipelineFlags& flags, const std::string& out_csv) {
    const std::vector<double> thresholds = parse_thresholds(thresholds_text);

    std::vector<SweepInput> videos;
    AnnotationSet ref;
    if (!ref_file.empty()) ref = load_annotations(ref_file);

    std::vector<fs::path> dirs;
    if (!fs::is_directory(corpus_dir)) {
        throw io_error("corpus " + corpus_dir + " is not a directory");
    }
    for (const auto& e : fs::directory_iterator(corpus_dir)) {
        if (e.is_directory()) dirs.push_back(e.path());
    }
    std::sort(dirs.begin(), dirs.end());
    if (dirs.empty()) {
        throw io_error("corpus " + corpus_dir + " contains no video directories");
    }

    for (const fs::path& dir : dirs) {
        SweepInput input;
        input.source_id = dir.filename().string();
        input.seq = load_sequence(dir, flags.fps);
        if (!roi_text.empty()) {
            input.roi = parse_roi(roi_text);
        } else {
            std::ifstream roi_in(dir / "roi.txt");
            std::string line;
            if (!roi_in || !std::getline(roi_in, line)) {
                throw io_error("video " + input.source_id +
                               " has no roi.txt and no --roi was given");
            }
            input.roi = parse_roi(line);
        }
        if (ref_file.empty()) {
            const fs::path gt = dir / "gt.csv";
            if (!fs::exists(gt)) {
                throw io_error("video " + input.source_id + " has no gt.csv and no --ref was given");
            }
            std::ifstream gt_in(gt);
            std::string line;
            int lineno = 0;
            while (std::getline(gt_in, line)) {
                ++lineno;
                if (lineno == 1 || line.empty()) continue;  // header
                const auto comma = line.find(',');
                const std::string phase = comma == std::string::npos ? "" : line.substr(0, comma);
                int frame = -1;
                try {
                    frame = std::stoi(line.substr(comma + 1));
                } catch (const std::exception&) {
                }
                if ((phase != "ED" && phase != "ES") || frame < 0) {
                    throw io_error("bad gt.csv line " + std::to_string(lineno) + " in " +
                                   input.source_id);
                }
                ref.push_back({input.source_id, phase == "ED" ? Phase::ED : Phase::ES, frame, "gt"});
            }
        }
        videos.push_back(std::move(input));
    }

    RunConfig base = flags.to_config();
    const std::vector<SweepRow> rows = threshold_sweep(videos, ref, thresholds, base.detector,
                                                       base.flow, base.phase, base.distance_mode);

    std::cout << "Difference Frame \\ Threshold\tDF0\tDF1\tDF2\tDF3\n";
    for (const SweepRow& row : rows) {
        std::cout << row.threshold << "\t" << hist_row(row.overall) << "\n";
    }
    for (const SweepRow& row : rows) {
        for (const SweepVideoResult& v : row.videos) {
            if (!v.ok) {
                std::cout << "failed: threshold " << row.threshold << " video " << v.source_id
                          << ": " << v.error << "\n";
            }
        }
    }

    if (!out_csv.empty()) {
        std::ofstream out(out_csv);
        if (!out) throw io_error("failed to write " + out_csv);
        out << "threshold,scope,df0,df1,df2,df3,overflow,unmatched\n";
        for (const SweepRow& row : rows) {
            const auto emit = [&](const char* scope, const DiffHistogram& h) {
                out << row.threshold << ',' << scope << ',' << h.df[0] << ',' << h.df[1] << ','
                    << h.df[2] << ',' << h.df[3] << ',' << h.overflow << ',' << h.unmatched << '\n';
            };
            emit("ED", row.ed);
            emit("ES", row.es);
            emit("overall", row.overall);
        }
        out << "threshold,video,keypoints,ok\n";
        for (const SweepRow& row : rows) {
            for (const SweepVideoResult& v : row.videos) {
                out << row.threshold << ',' << v.source_id << ',' << v.keypoint_count << ','
                    << (v.ok ? 1 : 0) << '\n';
            }
        }
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Automatic end-diastolic / end-systolic frame detection in coronary cine sequences"};
    app.require_subcommand(1);

    // preview
    auto* preview = app.add_subcommand("preview", "Export the first frame as a PGM for ROI picking");
    std::string preview_frames, preview_out;
    std::optional<double> preview_fps;
    preview->add_option("--frames", preview_frames, "Frame directory")->required();
    preview->add_option("--out", preview_out, "Output PGM path")->required();
    preview->add_option("--fps", preview_fps, "Frames per second");

    // phases
    auto* phases = app.add_subcommand("phases", "Detect ED/ES frames in a sequence");
    PipelineFlags phase_flags;
    std::string phases_out = ".";
    add_pipeline_flags(phases, phase_flags, /*roi_required=*/true);
    phases->add_option("--out", phases_out, "Output directory (default .)");

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic cine with known ED/ES frames");
    SynthConfig synth_cfg;
    std::string synth_out;
    synth->add_option("--out", synth_out, "Output directory")->required();
    synth->add_option("--frames", synth_cfg.num_frames, "Frame count, default 45");
    synth->add_option("--width", synth_cfg.width, "Frame width, default 192");
    synth->add_option("--height", synth_cfg.height, "Frame height, default 192");
    synth->add_option("--period", synth_cfg.period_frames, "Beat period in frames, default 15");
    synth->add_option("--amplitude", synth_cfg.amplitude, "Motion amplitude in px, default 5");
    synth->add_option("--noise", synth_cfg.noise_sigma, "Gaussian intensity noise sigma, default 0");
    synth->add_option("--seed", synth_cfg.seed, "RNG seed, default 1");
    synth->add_option("--fps", synth_cfg.fps, "Frames per second, default 15");
    synth->add_option("--sigma", synth_cfg.blob_sigma, "Blob sigma in px, default 2.5");
    synth->add_flag("--distractor", synth_cfg.distractor,
                    "Add a static bright rectangle outside the suggested ROI");

    // eval
    auto* eval = app.add_subcommand("eval", "Compare phase reports against reader annotations");
    std::vector<std::string> eval_auto;
    std::string eval_ref, eval_reader, eval_delta, eval_out;
    int eval_k = 1;
    eval->add_option("--auto", eval_auto, "Phase report JSON files")->take_all();
    eval->add_option("--ref", eval_ref, "Annotation CSV (source_id,phase,frame,reader)")->required();
    eval->add_option("--k", eval_k, "Within-k frame tolerance, default 1");
    eval->add_option("--reader", eval_reader, "Reader label to compare against");
    eval->add_option("--delta-readers", eval_delta, "Two reader labels A,B for inter-reader deltas");
    eval->add_option("--out", eval_out, "Machine-readable CSV output path");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Run the pipeline over a corpus at several thresholds");
    std::string sweep_corpus, sweep_thresholds = "0.5,0.8,0.9", sweep_ref, sweep_roi, sweep_out;
    PipelineFlags sweep_flags;
    sweep->add_option("--corpus", sweep_corpus, "Directory of per-video frame directories")
        ->required();
    sweep->add_option("--thresholds", sweep_thresholds, "Comma-separated list, default 0.5,0.8,0.9");
    sweep->add_option("--ref", sweep_ref, "Annotation CSV; omit to use per-video gt.csv");
    sweep->add_option("--roi", sweep_roi, "ROI override x0,y0,w,h; omit to use per-video roi.txt");
    sweep->add_option("--fps", sweep_flags.fps, "Frames per second (default 15)");
    sweep->add_option("--out", sweep_out, "Machine-readable CSV output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitBadArgs;
    }

    try {
        if (preview->parsed()) return cmd_preview(preview_frames, preview_fps, preview_out);
        if (phases->parsed()) return cmd_phases(phase_flags, phases_out);
        if (synth->parsed()) return cmd_synth(synth_cfg, synth_out);
        if (eval->parsed()) return cmd_eval(eval_auto, eval_ref, eval_k, eval_reader, eval_delta, eval_out);
        if (sweep->parsed())
            return cmd_sweep(sweep_corpus, sweep_thresholds, sweep_ref, sweep_roi, sweep_flags,
                             sweep_out);
    } catch (const config_error& e) {
        std::cerr << "error (arguments): " << e.what() << "\n";
        return kExitBadArgs;
    } catch (const io_error& e) {
        std::cerr << "error (input): " << e.what() << "\n";
        return kExitInput;
    } catch (const pipeline_error& e) {
        std::cerr << "error (pipeline): " << e.what() << "\n";
        return kExitPipeline;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPipeline;
    }
    return kExitOk;
}
