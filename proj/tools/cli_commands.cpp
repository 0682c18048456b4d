#include "cli_commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "evframe/event_io.hpp"
#include "evframe/oracle.hpp"
#include "evframe/pipeline.hpp"
#include "evframe/resource.hpp"

namespace evframe::cli {

namespace fs = std::filesystem;

namespace {

/// Thrown for unreadable inputs and unwritable outputs.
class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct PipelineFlags {
    std::string repr = "event-frame";
    std::uint64_t tau_us = 10'000;
    std::uint64_t count = 0;
    std::string rolling;
    std::uint32_t width = 1280;
    std::uint32_t height = 720;
    std::uint32_t banks = 1;
    std::string buffering = "fifo";
    std::size_t fifo_capacity = EventFifo::kDefaultCapacity;
    std::string timing = "behavioral";
    std::uint64_t clock_hz = 100'000'000;
    std::string order = "strict";
    bool flush = false;
};

void add_geometry_flags(CLI::App& cmd, PipelineFlags& f) {
    cmd.add_option("--width", f.width, "Sensor width in pixels")->capture_default_str();
    cmd.add_option("--height", f.height, "Sensor height in pixels")->capture_default_str();
}

void add_pipeline_flags(CLI::App& cmd, PipelineFlags& f) {
    cmd.add_option("--repr", f.repr, "binary | event-frame | exp-decay | event-frequency")->capture_default_str();
    cmd.add_option("--tau-us", f.tau_us, "Accumulation interval in microseconds")->capture_default_str();
    auto* count = cmd.add_option("--count", f.count, "Emit a frame every Z events instead of every tau");
    auto* rolling = cmd.add_option("--rolling", f.rolling, "Rolling window N,M,K in microseconds");
    count->excludes(rolling);
    add_geometry_flags(cmd, f);
    cmd.add_option("--banks", f.banks, "Parallel memory banks (pixels per clock)")->capture_default_str();
    cmd.add_option("--buffering", f.buffering, "fifo | pingpong | unbounded")->capture_default_str();
    cmd.add_option("--fifo-capacity", f.fifo_capacity, "FIFO capacity in events")->capture_default_str();
    cmd.add_option("--timing", f.timing, "behavioral | hardware")->capture_default_str();
    cmd.add_option("--clock-hz", f.clock_hz, "Modeled clock for hardware timing")->capture_default_str();
    cmd.add_option("--order", f.order, "strict | sort | warn")->capture_default_str();
    cmd.add_flag("--flush", f.flush, "Emit the final partial window");
}

RollingWindow parse_rolling(const std::string& text) {
    RollingWindow w;
    char c1 = 0;
    char c2 = 0;
    std::istringstream in(text);
    if (!(in >> w.span_us >> c1 >> w.visible_us >> c2 >> w.step_us) || c1 != ',' || c2 != ',' || !(in >> std::ws).eof()) {
        throw ConfigError("--rolling expects N,M,K in microseconds, got '" + text + "'");
    }
    return w;
}

SensorGeometry geometry_of(const PipelineFlags& f) {
    SensorGeometry g{f.width, f.height};
    g.validate();
    return g;
}

PipelineConfig build_config(const PipelineFlags& f) {
    PipelineConfig config;
    config.repr = Representation{parse_repr_kind(f.repr), f.tau_us};
    config.geometry = geometry_of(f);
    config.banks = f.banks;
    if (!f.rolling.empty()) {
        config.trigger = parse_rolling(f.rolling);
    } else if (f.count > 0) {
        config.trigger = CountWindow{f.count};
    } else {
        config.trigger = TimeWindow{f.tau_us};
    }
    if (f.buffering == "fifo") {
        config.buffering = Buffering{BufferKind::Fifo, f.fifo_capacity};
    } else if (f.buffering == "pingpong" || f.buffering == "ping-pong") {
        config.buffering = Buffering{BufferKind::PingPong, f.fifo_capacity};
    } else if (f.buffering == "unbounded") {
        config.buffering = Buffering{BufferKind::Unbounded, f.fifo_capacity};
    } else {
        throw ConfigError("unknown buffering '" + f.buffering + "'");
    }
    if (f.timing == "behavioral") {
        config.timing = Behavioral{};
    } else if (f.timing == "hardware") {
        config.timing = HardwareTimed{f.clock_hz};
    } else {
        throw ConfigError("unknown timing mode '" + f.timing + "'");
    }
    config.validate();
    return config;
}

OrderPolicy parse_order(const std::string& s) {
    if (s == "strict") return OrderPolicy::Strict;
    if (s == "sort") return OrderPolicy::Sort;
    if (s == "warn") return OrderPolicy::Warn;
    throw ConfigError("unknown order policy '" + s + "'");
}

/// Late events under `warn` are pinned to the latest timestamp seen so far, since the
/// pipeline needs a non-decreasing clock.
class OrderGate {
  public:
    explicit OrderGate(OrderPolicy policy) : policy_(policy) {}

    void apply(std::vector<Event>& batch) {
        for (Event& e : batch) {
            if (seen_ && e.t < latest_) {
                if (policy_ == OrderPolicy::Strict) throw StreamOrderError(latest_, e.t);
                ++late_;
                e.t = latest_;
            }
            latest_ = e.t;
            seen_ = true;
        }
    }
    std::size_t late() const noexcept { return late_; }

  private:
    OrderPolicy policy_;
    bool seen_ = false;
    std::uint64_t latest_ = 0;
    std::size_t late_ = 0;
};

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open input '" + path + "'");
    return in;
}

std::vector<Event> load_events(const std::string& path, const SensorGeometry& geometry, OrderPolicy policy,
                               std::ostream& err) {
    auto in = open_input(path);
    EventStream stream = read_event_stream(in, geometry, policy);
    if (policy == OrderPolicy::Warn) {
        OrderGate gate(policy);
        gate.apply(stream.events);
        if (gate.late()) err << "warning: " << gate.late() << " out-of-order events clamped to the running timestamp\n";
    }
    return std::move(stream.events);
}

void write_file_pgm(const fs::path& path, const Frame& frame) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    write_frame_pgm(frame, out);
}

int cmd_convert(const PipelineFlags& flags, const std::string& input, const std::string& output, std::ostream& out,
                std::ostream& err) {
    const PipelineConfig config = build_config(flags);
    const OrderPolicy policy = parse_order(flags.order);

    std::error_code ec;
    fs::create_directories(output, ec);
    if (ec || !fs::is_directory(output)) throw IoError("cannot create output directory '" + output + "'");
    const fs::path dir(output);

    FramePipeline pipeline(config, [&dir](Frame&& frame) { write_file_pgm(dir / frame_file_name(frame.window_index), frame); });

    if (policy == OrderPolicy::Sort) {
        const auto events = load_events(input, config.geometry, policy, err);
        pipeline.push(events);
    } else {
        auto in = open_input(input);
        EventReader reader(in, config.geometry);
        OrderGate gate(policy);
        std::vector<Event> batch;
        batch.reserve(1 << 16);
        while (true) {
            batch.clear();
            if (!reader.next_batch(batch, 1 << 16)) break;
            gate.apply(batch);
            pipeline.push(batch);
        }
        if (gate.late()) err << "warning: " << gate.late() << " out-of-order events clamped to the running timestamp\n";
    }
    pipeline.finish(flags.flush);

    std::ofstream stats(dir / "stats.txt");
    stats << format_stats(pipeline.stats());
    if (!stats) throw IoError("cannot write stats.txt");
    out << pipeline.stats().frames_emitted << " frames written to " << output << '\n';
    return kSuccess;
}

struct EstimateFlags {
    PipelineFlags geometry;
    std::string repr = "event-frame";
    std::uint32_t banks = 1;
    std::string rolling;
    bool pingpong = false;
    std::size_t fifo_capacity = kTableFifoCapacity;
    unsigned fifo_bits = kFifoElementBits;
    std::vector<std::string> platforms;
    std::string platforms_file;
    std::string format = "table";
};

int cmd_estimate(const EstimateFlags& f, std::ostream& out) {
    PipelineConfig config;
    config.repr.kind = parse_repr_kind(f.repr);
    config.geometry = geometry_of(f.geometry);
    config.banks = f.banks;
    if (!f.rolling.empty()) config.trigger = parse_rolling(f.rolling);
    if (f.pingpong) config.buffering.kind = BufferKind::PingPong;
    if (f.format != "table" && f.format != "kv") throw ConfigError("unknown format '" + f.format + "'");

    std::vector<PlatformProfile> known = builtin_platforms();
    if (!f.platforms_file.empty()) {
        auto in = open_input(f.platforms_file);
        for (auto& p : parse_platform_profiles(in)) {
            known.erase(std::remove_if(known.begin(), known.end(), [&](const auto& k) { return k.name == p.name; }),
                        known.end());
            known.push_back(std::move(p));
        }
    }
    std::vector<PlatformProfile> selected;
    if (f.platforms.empty()) {
        selected = known;
    } else {
        for (const auto& name : f.platforms) {
            auto p = find_platform(name, known);
            if (!p) throw ConfigError("unknown platform '" + name + "'");
            selected.push_back(*p);
        }
    }

    const ResourceEstimate est = estimate_blocks(config, f.fifo_capacity, f.fifo_bits);
    const auto margin_text = [](const FitReport& r) {
        std::string s = format_blocks(BlockCount{static_cast<std::uint64_t>(r.margin_halves < 0 ? -r.margin_halves : r.margin_halves)});
        return r.margin_halves < 0 ? "-" + s : s;
    };

    if (f.format == "kv") {
        out << "representation=" << repr_name(config.repr.kind) << '\n'
            << "cell_bits=" << est.cell_bits << '\n'
            << "banks=" << est.banks << '\n'
            << "accumulator_bits=" << est.accumulator_bits << '\n'
            << "fifo_bits=" << est.fifo_bits << '\n'
            << "accumulator_blocks=" << format_blocks(est.accumulator_blocks) << '\n'
            << "fifo_blocks=" << format_blocks(est.fifo_blocks) << '\n'
            << "pingpong_multiplier=" << est.pingpong_multiplier << '\n'
            << "total_blocks=" << format_blocks(est.bram_blocks) << '\n';
        for (const auto& p : selected) {
            const FitReport r = check_platform_fit(est, p);
            out << "platform." << p.name << ".feasible=" << (r.feasible_bram ? "true" : "false") << '\n'
                << "platform." << p.name << ".margin_blocks=" << margin_text(r) << '\n'
                << "platform." << p.name << ".needs_uram_or_external=" << (r.needs_uram_or_external ? "true" : "false") << '\n'
                << "platform." << p.name << ".uram_fallback=" << (r.uram_fallback ? "true" : "false") << '\n';
        }
        return kSuccess;
    }

    out << "representation    " << repr_name(config.repr.kind) << '\n'
        << "cell bits         " << est.cell_bits << '\n'
        << "banks             " << est.banks << '\n'
        << "accumulator       " << format_blocks(est.accumulator_blocks) << " blocks";
    if (est.pingpong_multiplier > 1) out << " x" << est.pingpong_multiplier;
    out << '\n'
        << "fifo              " << format_blocks(est.fifo_blocks) << " blocks\n"
        << "total             " << format_blocks(est.bram_blocks) << " blocks\n";
    for (const auto& p : selected) {
        const FitReport r = check_platform_fit(est, p);
        out << p.name << ": " << format_blocks(est.bram_blocks) << " blocks, ";
        if (r.feasible_bram) {
            out << "feasible, margin " << margin_text(r);
        } else {
            out << "infeasible, margin " << margin_text(r);
            if (r.uram_fallback) {
                out << ", needs Ultra RAM or external memory";
            } else if (r.needs_uram_or_external) {
                out << ", needs external memory";
            }
        }
        out << '\n';
    }
    return kSuccess;
}

struct SynthFlags {
    PipelineFlags geometry;
    std::string pattern = "moving_dot";
    std::uint64_t duration_us = 100'000;
    double rate = 1.0e6;
    std::uint64_t seed = 0;
    std::string output;
};

SyntheticSpec synthetic_spec(const SynthFlags& f) {
    SyntheticSpec spec;
    spec.geometry = geometry_of(f.geometry);
    spec.duration_us = f.duration_us;
    spec.pattern = parse_synthetic_pattern(f.pattern);
    spec.rate = f.rate;
    spec.seed = f.seed;
    return spec;
}

int cmd_synth(const SynthFlags& f, std::ostream& out) {
    const auto events = generate_synthetic_events(synthetic_spec(f));
    std::ofstream file;
    std::ostream* sink = &out;
    if (!f.output.empty() && f.output != "-") {
        file.open(f.output, std::ios::binary);
        if (!file) throw IoError("cannot write '" + f.output + "'");
        sink = &file;
    }
    std::string buffer;
    buffer.reserve(1 << 20);
    for (const Event& e : events) {
        buffer += format_event_line(e);
        buffer += '\n';
        if (buffer.size() > (1 << 20) - 64) {
            sink->write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
            buffer.clear();
        }
    }
    sink->write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    sink->flush();
    if (!*sink) throw IoError("failed writing events");
    return kSuccess;
}

int cmd_compare(const PipelineFlags& flags, const std::string& input, const SynthFlags& synth, std::ostream& out) {
    const PipelineConfig config = build_config(flags);
    std::vector<Event> events;
    if (!synth.pattern.empty()) {
        SynthFlags s = synth;
        s.geometry.width = flags.width;
        s.geometry.height = flags.height;
        events = generate_synthetic_events(synthetic_spec(s));
    } else {
        std::ostringstream warnings;
        events = load_events(input, config.geometry, parse_order(flags.order), warnings);
        out << warnings.str();
    }

    const PipelineRun run = run_pipeline(events, config, flags.flush);
    const std::vector<Frame> expected = oracle::reference_frames(events, config, flags.flush);

    const std::size_t common = std::min(expected.size(), run.frames.size());
    for (std::size_t i = 0; i < common; ++i) {
        const Frame& want = expected[i];
        const Frame& got = run.frames[i];
        if (want.t_end != got.t_end) {
            out << "mismatch: frame " << i << " t_end expected " << want.t_end << " got " << got.t_end << '\n';
            return kMismatch;
        }
        for (std::size_t a = 0; a < want.pixels.size(); ++a) {
            if (want.pixels[a] != got.pixels[a]) {
                out << "mismatch: frame " << i << " pixel (" << a % want.width << ", " << a / want.width << ") expected "
                    << int(want.pixels[a]) << " got " << int(got.pixels[a]) << '\n';
                if (run.stats.events_dropped) out << "pipeline dropped " << run.stats.events_dropped << " events\n";
                return kMismatch;
            }
        }
    }
    if (expected.size() != run.frames.size()) {
        out << "mismatch: expected " << expected.size() << " frames, pipeline produced " << run.frames.size() << '\n';
        return kMismatch;
    }
    out << "identical: " << run.frames.size() << " frames, " << events.size() << " events\n";
    return kSuccess;
}

}// namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Event-camera frame generation and FPGA accumulator model"};
    app.require_subcommand(1);

    PipelineFlags convert_flags;
    std::string convert_in;
    std::string convert_out;
    auto* convert = app.add_subcommand("convert", "Convert a CSV event file into PGM frames");
    add_pipeline_flags(*convert, convert_flags);
    convert->add_option("input", convert_in, "Event file (t,x,y,p per line)")->required();
    convert->add_option("output", convert_out, "Output directory")->required();

    EstimateFlags estimate_flags;
    auto* estimate = app.add_subcommand("estimate", "Estimate block RAM use and platform fit");
    estimate->add_option("--repr", estimate_flags.repr, "Representation")->capture_default_str();
    estimate->add_option("--banks", estimate_flags.banks, "Parallel memory banks")->capture_default_str();
    estimate->add_option("--rolling", estimate_flags.rolling, "Rolling window N,M,K in microseconds");
    estimate->add_flag("--pingpong", estimate_flags.pingpong, "Double the accumulator for ping-pong buffering");
    estimate->add_option("--fifo-capacity", estimate_flags.fifo_capacity, "FIFO capacity in events")->capture_default_str();
    estimate->add_option("--fifo-bits", estimate_flags.fifo_bits, "Bits per FIFO element")->capture_default_str();
    add_geometry_flags(*estimate, estimate_flags.geometry);
    estimate->add_option("--platform", estimate_flags.platforms, "Platform name (repeatable; default all)");
    estimate->add_option("--platforms-file", estimate_flags.platforms_file, "Extra platform profiles");
    estimate->add_option("--format", estimate_flags.format, "table | kv")->capture_default_str();

    SynthFlags synth_flags;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic event stream");
    synth->add_option("--pattern", synth_flags.pattern, "moving_dot | moving_edge | uniform_noise")->capture_default_str();
    synth->add_option("--duration-us", synth_flags.duration_us, "Stream length")->capture_default_str();
    synth->add_option("--rate", synth_flags.rate, "Mean events per second")->capture_default_str();
    synth->add_option("--seed", synth_flags.seed, "Random seed")->capture_default_str();
    add_geometry_flags(*synth, synth_flags.geometry);
    synth->add_option("-o,--output", synth_flags.output, "Output file (default stdout)");

    PipelineFlags compare_flags;
    std::string compare_in;
    SynthFlags compare_synth;
    compare_synth.pattern.clear();
    auto* compare = app.add_subcommand("compare", "Check the pipeline against the brute-force reference");
    add_pipeline_flags(*compare, compare_flags);
    auto* compare_input = compare->add_option("input", compare_in, "Event file");
    auto* synthetic = compare->add_option("--synthetic", compare_synth.pattern, "Use a generated stream instead of a file");
    compare->add_option("--seed", compare_synth.seed, "Seed for --synthetic")->capture_default_str();
    compare->add_option("--duration-us", compare_synth.duration_us, "Length for --synthetic")->capture_default_str();
    compare->add_option("--rate", compare_synth.rate, "Rate for --synthetic")->capture_default_str();
    compare_input->excludes(synthetic);

    std::vector<const char*> argv{"evframe"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kUsageError;
    }

    try {
        if (*convert) return cmd_convert(convert_flags, convert_in, convert_out, out, err);
        if (*estimate) return cmd_estimate(estimate_flags, out);
        if (*synth) return cmd_synth(synth_flags, out);
        if (*compare) {
            if (compare_in.empty() && compare_synth.pattern.empty()) {
                throw ConfigError("compare needs an input file or --synthetic");
            }
            return cmd_compare(compare_flags, compare_in, compare_synth, out);
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    } catch (const StreamOrderError& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    }
    return kUsageError;
}

}// namespace evframe::cli
