#include "cli.hpp"

#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "seampack/analysis.hpp"
#include "seampack/strategies.hpp"

namespace seampack::cli {

namespace {

struct PackFlags {
    std::string strategy = "sp";
    std::size_t seq_len = 2048;
    double r_max = 0.3;
    std::size_t c_extra = 0;
    CLI::Option* c_extra_opt = nullptr;
    std::string tail = "drop";
    Token pad_token = 0;
    Token separator = 0;
    CLI::Option* separator_opt = nullptr;
};

void add_pack_flags(CLI::App& sub, PackFlags& f, bool with_strategy) {
    if (with_strategy) {
        sub.add_option("--strategy", f.strategy, "sp | ct | ffd | bfd | bfdm")->capture_default_str();
    }
    sub.add_option("--seq-len", f.seq_len, "tokens per sequence")->capture_default_str();
    sub.add_option("--r-max", f.r_max, "maximum repetition ratio in (0, 1]")->capture_default_str();
    f.c_extra_opt = sub.add_option("--c-extra", f.c_extra,
                                   "extra bin capacity (default scales with seq-len: 50 at 2048, 10 at 512)");
    sub.add_option("--tail", f.tail, "final partial sequence: drop | pad")->capture_default_str();
    sub.add_option("--pad-token", f.pad_token, "token id used for padding")->capture_default_str();
    f.separator_opt = sub.add_option("--separator-token", f.separator, "token inserted between documents (ct only)");
}

PackingConfig resolve_config(const PackFlags& f, std::optional<std::size_t> seq_len_override = std::nullopt) {
    PackingConfig c;
    const auto strategy = parse_strategy(f.strategy);
    if (!strategy) throw ConfigError("unknown strategy \"" + f.strategy + "\"");
    const auto tail = parse_tail_policy(f.tail);
    if (!tail) throw ConfigError("unknown tail policy \"" + f.tail + "\"");
    c.strategy = *strategy;
    c.tail_policy = *tail;
    c.seq_len = seq_len_override.value_or(f.seq_len);
    c.r_max = f.r_max;
    c.c_extra = f.c_extra_opt->count() > 0 ? f.c_extra : default_c_extra(c.seq_len);
    c.pad_token = f.pad_token;
    if (f.separator_opt->count() > 0) c.separator_token = f.separator;
    c.validate();
    return c;
}

void emit(const std::string& text, const std::string& output, std::ostream& out) {
    if (output.empty() || output == "-") {
        out << text;
    } else {
        write_file_atomic(output, text);
    }
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string p;
    while (std::getline(ss, p, ',')) {
        if (!p.empty()) parts.push_back(p);
    }
    return parts;
}

std::vector<double> parse_r_list(const std::string& s) {
    std::vector<double> rs;
    for (const auto& p : split_csv(s)) {
        try {
            std::size_t pos = 0;
            rs.push_back(std::stod(p, &pos));
            if (pos != p.size()) throw std::invalid_argument(p);
        } catch (const std::exception&) {
            throw ConfigError("bad r value \"" + p + "\" in --sweep");
        }
    }
    if (rs.empty()) throw ConfigError("--sweep needs at least one value");
    return rs;
}

struct CorpusSource {
    std::string input;
    std::string synthetic;
    std::size_t docs = 0;
    std::uint64_t seed = 0;
};

void add_corpus_source(CLI::App& sub, CorpusSource& src) {
    sub.add_option("--input", src.input, "tokenized corpus (JSONL)");
    sub.add_option("--synthetic", src.synthetic, "synthetic corpus shaped like: pubmed | bbc | financial");
    sub.add_option("--docs", src.docs, "synthetic corpus size (0 = profile's own counts)")->capture_default_str();
    sub.add_option("--seed", src.seed, "seed for synthetic corpora")->capture_default_str();
}

std::vector<Document> load_corpus(const CorpusSource& src, std::ostream& err) {
    if (!src.input.empty()) {
        auto ing = ingest_jsonl(std::filesystem::path(src.input));
        if (ing.skipped > 0) err << "skipped " << ing.skipped << " empty documents\n";
        return std::move(ing.documents);
    }
    return synthesize_corpus(length_profile(src.synthetic), src.docs, src.seed);
}

void check_corpus_source(const CorpusSource& src) {
    if (src.input.empty() == src.synthetic.empty()) {
        throw ConfigError("exactly one of --input or --synthetic is required");
    }
    if (!src.synthetic.empty()) (void)length_profile(src.synthetic);
}

int cmd_pack(const JobManifest& m, std::ostream& out, std::ostream& err) {
    auto ingested = ingest_jsonl(m.input);
    if (ingested.skipped > 0) err << "skipped " << ingested.skipped << " empty documents\n";
    const auto& docs = ingested.documents;
    auto result = pack(docs, m.config);
    write_sequences(result.sequences, m.config.seq_len, m.output, m.format);
    auto report = stats_report(result.stats, m.config, fingerprint(docs));
    report["skipped_documents"] = ingested.skipped;
    report["manifest"] = to_json(m);
    if (m.stats) write_file_atomic(*m.stats, report.dump(2) + "\n");
    out << "packed " << docs.size() << " documents into " << result.stats.sequences_emitted << " sequences ("
        << "repeated " << result.stats.repeated_tokens << ", dropped " << result.stats.dropped_tokens << ", padded "
        << result.stats.padded_tokens << ")\n";
    if (!result.stats.conserves(m.config.seq_len)) {
        err << "token ledger does not balance\n";
        return kRuntimeError;
    }
    return kOk;
}

}  // namespace

nlohmann::json to_json(const JobManifest& m) {
    nlohmann::json j = {{"command", m.command},
                        {"config", config_to_json(m.config)},
                        {"input", m.input.string()},
                        {"output", m.output.string()},
                        {"format", m.format == SequenceFormat::jsonl ? "jsonl" : "binary"}};
    j["stats"] = m.stats ? nlohmann::json(m.stats->string()) : nlohmann::json(nullptr);
    return j;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"seampack: pack tokenized corpora into fixed-length training sequences"};
    app.require_subcommand(1);

    // pack
    auto* pack_cmd = app.add_subcommand("pack", "pack a corpus into sequences");
    PackFlags pack_flags;
    std::string pack_input, pack_output, pack_format = "jsonl", pack_stats;
    add_pack_flags(*pack_cmd, pack_flags, true);
    pack_cmd->add_option("--input", pack_input, "tokenized corpus (JSONL)")->required();
    pack_cmd->add_option("--output", pack_output, "sequence file")->required();
    pack_cmd->add_option("--format", pack_format, "jsonl | binary")->capture_default_str();
    pack_cmd->add_option("--stats", pack_stats, "write the token ledger as JSON");

    // analyze
    auto* analyze_cmd = app.add_subcommand("analyze", "length histogram of a corpus");
    CorpusSource analyze_src;
    std::size_t analyze_seq_len = 2048;
    std::string analyze_fmt = "text", analyze_out;
    add_corpus_source(*analyze_cmd, analyze_src);
    analyze_cmd->add_option("--seq-len", analyze_seq_len, "interval width")->capture_default_str();
    analyze_cmd->add_option("--format", analyze_fmt, "text | json")->capture_default_str();
    analyze_cmd->add_option("--output", analyze_out, "write here instead of stdout");

    // estimate
    auto* estimate_cmd = app.add_subcommand("estimate", "closed-form sliding-window estimates");
    std::string est_hist, est_input, est_sweep, est_fmt = "text", est_out;
    std::size_t est_seq_len = 2048;
    double est_r = 0.3;
    estimate_cmd->add_option("--hist", est_hist, "histogram JSON {\"seq_len\":N,\"counts\":{\"k\":T_k}}");
    estimate_cmd->add_option("--input", est_input, "corpus; histogram built on the fly");
    estimate_cmd->add_option("--seq-len", est_seq_len, "interval width when using --input")->capture_default_str();
    estimate_cmd->add_option("--r", est_r, "maximum repetition ratio")->capture_default_str();
    estimate_cmd->add_option("--sweep", est_sweep, "comma-separated ascending r values");
    estimate_cmd->add_option("--format", est_fmt, "text | json | csv (csv for sweeps)")->capture_default_str();
    estimate_cmd->add_option("--output", est_out, "write here instead of stdout");

    // compare
    auto* compare_cmd = app.add_subcommand("compare", "run several strategies on one corpus");
    CorpusSource cmp_src;
    PackFlags cmp_flags;
    std::string cmp_strategies = "sp,ct,ffd,bfd,bfdm", cmp_fmt = "text", cmp_out;
    add_corpus_source(*compare_cmd, cmp_src);
    add_pack_flags(*compare_cmd, cmp_flags, false);
    compare_cmd->add_option("--strategies", cmp_strategies, "comma-separated strategies")->capture_default_str();
    compare_cmd->add_option("--format", cmp_fmt, "text | json")->capture_default_str();
    compare_cmd->add_option("--output", cmp_out, "write here instead of stdout");

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "FFD vs BFD timing on stage-two workloads");
    std::string bench_shapes = "bbc,financial,pubmed", bench_input, bench_fmt = "text", bench_out;
    std::size_t bench_docs = 0, bench_items = 0, bench_reps = 5, bench_seq_len = 2048;
    std::uint64_t bench_seed = 0;
    double bench_r = 0.3;
    bench_cmd->add_option("--synthetic", bench_shapes, "comma-separated profiles")->capture_default_str();
    bench_cmd->add_option("--input", bench_input, "use this corpus instead of synthetic profiles");
    bench_cmd->add_option("--seq-len", bench_seq_len, "seq-len for --input and --items")->capture_default_str();
    bench_cmd->add_option("--r-max", bench_r, "maximum repetition ratio")->capture_default_str();
    bench_cmd->add_option("--docs", bench_docs, "synthetic corpus size (0 = profile counts)")->capture_default_str();
    bench_cmd->add_option("--items", bench_items, "also time N uniformly random items")->capture_default_str();
    bench_cmd->add_option("--repetitions", bench_reps, "timed runs per packer (>= 3)")->capture_default_str();
    bench_cmd->add_option("--seed", bench_seed, "seed for synthetic workloads")->capture_default_str();
    bench_cmd->add_option("--format", bench_fmt, "text | json")->capture_default_str();
    bench_cmd->add_option("--output", bench_out, "write here instead of stdout");

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    if (argv.empty()) argv.push_back("seampack");
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kUsageError;
    }

    try {
        if (pack_cmd->parsed()) {
            JobManifest m;
            m.command = "pack";
            m.config = resolve_config(pack_flags);
            if (m.config.separator_token && m.config.strategy != Strategy::ct) {
                throw ConfigError("--separator-token only applies to --strategy ct");
            }
            m.input = pack_input;
            m.output = pack_output;
            const auto fmt = parse_sequence_format(pack_format);
            if (!fmt) throw ConfigError("unknown format \"" + pack_format + "\"");
            m.format = *fmt;
            if (!pack_stats.empty()) m.stats = pack_stats;
            try {
                return cmd_pack(m, out, err);
            } catch (const ConfigError&) {
                throw;
            } catch (const std::exception& e) {
                err << "error: " << e.what() << '\n';
                return kRuntimeError;
            }
        }

        if (analyze_cmd->parsed()) {
            check_corpus_source(analyze_src);
            if (analyze_seq_len < 2) throw ConfigError("--seq-len must be at least 2");
            if (analyze_fmt != "text" && analyze_fmt != "json") throw ConfigError("unknown format " + analyze_fmt);
            try {
                const auto docs = load_corpus(analyze_src, err);
                const auto hist = build_histogram(docs, analyze_seq_len);
                const double total = static_cast<double>(hist.total());
                if (analyze_fmt == "json") {
                    auto j = histogram_to_json(hist);
                    j["documents"] = hist.total();
                    j["tokens"] = fingerprint(docs).tokens;
                    emit(j.dump(2) + "\n", analyze_out, out);
                } else {
                    std::ostringstream os;
                    os << "interval  lower      upper      documents  percent\n";
                    for (const auto& [k, t] : hist.counts) {
                        char line[128];
                        std::snprintf(line, sizeof line, "%-9zu %-10zu %-10zu %-10llu %6.2f%%\n", k,
                                      k * analyze_seq_len, (k + 1) * analyze_seq_len,
                                      static_cast<unsigned long long>(t), 100.0 * static_cast<double>(t) / total);
                        os << line;
                    }
                    os << "total " << hist.total() << " documents, " << fingerprint(docs).tokens << " tokens\n";
                    emit(os.str(), analyze_out, out);
                }
                return kOk;
            } catch (const ConfigError&) {
                throw;
            } catch (const std::exception& e) {
                err << "error: " << e.what() << '\n';
                return kRuntimeError;
            }
        }

        if (estimate_cmd->parsed()) {
            if (est_hist.empty() == est_input.empty()) throw ConfigError("exactly one of --hist or --input is required");
            if (est_fmt != "text" && est_fmt != "json" && est_fmt != "csv") throw ConfigError("unknown format " + est_fmt);
            std::vector<double> sweep;
            if (!est_sweep.empty()) sweep = parse_r_list(est_sweep);
            LengthHistogram hist;
            try {
                if (!est_hist.empty()) {
                    if (!std::filesystem::exists(est_hist)) {
                        err << "error: cannot open " << est_hist << '\n';
                        return kRuntimeError;
                    }
                    hist = read_histogram(est_hist);
                } else {
                    hist = build_histogram(ingest_jsonl(std::filesystem::path(est_input)).documents, est_seq_len);
                }
            } catch (const FormatError& e) {
                err << "error: " << e.what() << '\n';
                return kUsageError;
            } catch (const ConfigError&) {
                throw;
            } catch (const std::exception& e) {
                err << "error: " << e.what() << '\n';
                return kRuntimeError;
            }
            std::string text;
            if (sweep.empty()) {
                const auto report = estimate(hist, est_r);
                text = est_fmt == "json" ? to_json(report).dump(2) + "\n" : format_estimate(report);
            } else {
                const auto table = sweep_rmax(hist, sweep, hist.seq_len);
                text = est_fmt == "json" ? to_json(table).dump(2) + "\n"
                       : est_fmt == "csv" ? format_sweep_csv(table)
                                          : format_sweep(table);
            }
            emit(text, est_out, out);
            return kOk;
        }

        if (compare_cmd->parsed()) {
            check_corpus_source(cmp_src);
            if (cmp_fmt != "text" && cmp_fmt != "json") throw ConfigError("unknown format " + cmp_fmt);
            std::optional<std::size_t> seq_len;
            if (!cmp_src.synthetic.empty() && compare_cmd->get_option("--seq-len")->count() == 0) {
                seq_len = length_profile(cmp_src.synthetic).seq_len;
            }
            std::vector<PackingConfig> configs;
            for (const auto& name : split_csv(cmp_strategies)) {
                auto flags = cmp_flags;
                flags.strategy = name;
                configs.push_back(resolve_config(flags, seq_len));
            }
            if (configs.empty()) throw ConfigError("--strategies is empty");
            try {
                const auto docs = load_corpus(cmp_src, err);
                const auto rows = compare_strategies(docs, configs);
                emit(cmp_fmt == "json" ? to_json(rows, fingerprint(docs)).dump(2) + "\n" : format_comparison(rows),
                     cmp_out, out);
                return kOk;
            } catch (const ConfigError&) {
                throw;
            } catch (const std::exception& e) {
                err << "error: " << e.what() << '\n';
                return kRuntimeError;
            }
        }

        if (bench_cmd->parsed()) {
            if (bench_reps < 3) throw ConfigError("--repetitions must be at least 3");
            if (bench_fmt != "text" && bench_fmt != "json") throw ConfigError("unknown format " + bench_fmt);
            std::vector<std::string> shapes = bench_input.empty() ? split_csv(bench_shapes) : std::vector<std::string>{};
            for (const auto& s : shapes) (void)length_profile(s);
            try {
                std::vector<BenchWorkload> workloads;
                for (const auto& s : shapes) {
                    PackingConfig c;
                    c.seq_len = length_profile(s).seq_len;
                    c.c_extra = default_c_extra(c.seq_len);
                    c.r_max = bench_r;
                    c.validate();
                    const auto docs = synthesize_corpus(length_profile(s), bench_docs, bench_seed);
                    workloads.push_back(stage_two_workload(s, docs, c));
                }
                if (!bench_input.empty()) {
                    PackingConfig c;
                    c.seq_len = bench_seq_len;
                    c.c_extra = default_c_extra(c.seq_len);
                    c.r_max = bench_r;
                    c.validate();
                    const auto docs = ingest_jsonl(std::filesystem::path(bench_input)).documents;
                    workloads.push_back(stage_two_workload("input", docs, c));
                }
                if (bench_items > 0) {
                    const std::size_t cap = bench_seq_len + default_c_extra(bench_seq_len);
                    std::mt19937_64 rng(bench_seed);
                    std::uniform_int_distribution<std::size_t> dist(1, bench_seq_len - 1);
                    BenchWorkload w{"random", {}, cap};
                    for (std::size_t i = 0; i < bench_items; ++i) w.items.push_back({i, dist(rng), {}});
                    workloads.push_back(std::move(w));
                }
                const auto rows = bench_packers(workloads, bench_reps);
                emit(bench_fmt == "json" ? to_json(rows).dump(2) + "\n" : format_bench(rows), bench_out, out);
                return kOk;
            } catch (const ConfigError&) {
                throw;
            } catch (const std::exception& e) {
                err << "error: " << e.what() << '\n';
                return kRuntimeError;
            }
        }
    } catch (const ConfigError& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return kUsageError;
}

}  // namespace seampack::cli
