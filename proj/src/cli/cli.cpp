#include "eqr/cli/cli.hpp"

#include "eqr/common/build_info.hpp"
#include "eqr/common/display.hpp"
#include "eqr/common/error.hpp"
#include "eqr/common/files.hpp"
#include "eqr/common/hashing.hpp"
#include "eqr/evaluation/evaluation.hpp"
#include "eqr/ingestion/document_store.hpp"
#include "eqr/metrics/metrics.hpp"
#include "eqr/pipeline/pipeline.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <sstream>

namespace eqr::cli {

namespace fs = std::filesystem;

namespace {

/// Flag combinations CLI11 cannot express; reported like its own errors.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Flags {
    std::string config;
    std::string ticker;
    std::string fixtures;
    std::string output;
    std::string format;
    std::string provider;
    std::string replay_file;
    std::string as_of;
    bool no_cache = false;
};

void add_source_flags(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config, "Run configuration (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--ticker", f.ticker, "Company ticker");
    sub->add_option("--fixtures", f.fixtures, "Fixture directory with a manifest.json")->check(CLI::ExistingDirectory);
}

void add_provider_flags(CLI::App* sub, Flags& f) {
    sub->add_option("--provider", f.provider, "Completion provider")->check(CLI::IsMember({"mock", "replay", "http"}));
    sub->add_option("--replay-file", f.replay_file, "Recorded completions for --provider replay");
}

/// Config file first, then flags on top of it.
pipeline::RunConfig build_config(const Flags& f, bool ticker_required = true) {
    pipeline::RunConfig c;
    if (!f.config.empty()) {
        c = pipeline::RunConfig::load(f.config);
    } else {
        c.aliases = default_data_dir() / "aliases.json";
        if (f.fixtures.empty()) throw UsageError("--fixtures or --config is required");
    }
    if (!f.ticker.empty()) c.ticker = f.ticker;
    if (ticker_required && c.ticker.empty()) throw UsageError("--ticker is required");
    if (!f.fixtures.empty()) c.sources.fixtures = fs::absolute(f.fixtures).lexically_normal();
    if (!f.output.empty()) c.output_dir = f.output;
    if (!f.format.empty()) c.formats = {*report::parse_format(f.format)};
    if (!f.provider.empty()) c.provider.kind = f.provider;
    if (!f.replay_file.empty()) c.provider.replay_file = f.replay_file;
    if (!f.as_of.empty()) c.as_of = f.as_of;
    if (f.no_cache) c.cache = false;
    c.validate();
    return c;
}

std::size_t populated_fields(const ingestion::CompanyFinancials& fin, std::size_t& with_provenance) {
    static constexpr ingestion::LineItem kItems[] = {
        ingestion::LineItem::Revenue,          ingestion::LineItem::OperatingExpense, ingestion::LineItem::Sga,
        ingestion::LineItem::DepreciationAmortization, ingestion::LineItem::NetDebt,
        ingestion::LineItem::SharesOutstanding, ingestion::LineItem::TaxRate, ingestion::LineItem::InvestedCapital,
        ingestion::LineItem::Nopat};
    std::size_t populated = 0;
    with_provenance = 0;
    for (const auto& p : fin.periods)
        for (auto item : kItems) {
            if (!p.get(item)) continue;
            ++populated;
            auto it = fin.provenance.find({p.period, item});
            if (it != fin.provenance.end() && !it->second.doc_id.empty() && it->second.length > 0) ++with_provenance;
        }
    return populated;
}

// ---- commands ---------------------------------------------------------------

int cmd_ingest(const Flags& f, std::ostream& out) {
    auto c = build_config(f);
    const auto data = pipeline::ingest(c);
    const auto& fin = data.financials;
    out << "ticker: " << fin.ticker << "\ncompany: " << fin.company_name << "\ncurrency: " << fin.currency << "\n";
    out << "documents:\n";
    for (const auto& d : data.documents) {
        out << fmt::format("  {}  {}  {}  {} bytes  sha256 {}\n", d.id, ingestion::to_string(d.kind), d.period,
                           display::grouped(static_cast<double>(d.body.size()), 0), sha256_hex(d.body).substr(0, 12));
    }
    std::string periods;
    for (const auto& p : fin.periods) periods += (periods.empty() ? "" : ", ") + p.period;
    out << "periods: " << periods << "\n";
    std::size_t traced = 0;
    const std::size_t populated = populated_fields(fin, traced);
    out << fmt::format("provenance: {} of {} populated fields traced to a source span\n", traced, populated);
    std::string peers;
    for (const auto& p : data.peers) peers += (peers.empty() ? "" : ", ") + p.ticker;
    out << "peers: " << (peers.empty() ? "none" : peers) << "\n";
    if (c.cache) {
        out << "store: " << (c.resolved_cache_dir() / "documents").string() << "\n";
    }
    return kExitOk;
}

int cmd_metrics(const Flags& f, bool display_form, std::ostream& out) {
    auto c = build_config(f);
    c.cache = false;  // nothing worth persisting
    const auto data = pipeline::ingest(c);
    const auto table = metrics::build_metric_table(data.financials);
    out << (display_form ? agents::render_metric_table(table, data.financials.currency) : metrics::serialize(table));
    return kExitOk;
}

int cmd_report(const Flags& f, std::ostream& out, std::ostream& err) {
    if (f.config.empty() && f.ticker.empty()) throw UsageError("--ticker is required");
    if (f.config.empty()) throw UsageError("--config is required");
    const auto c = build_config(f);
    pipeline::RunOptions options;
    options.warn = [&err](const std::string& w) { err << "warning: " << w << "\n"; };
    const auto r = pipeline::run_pipeline(c, options);
    for (const auto& p : r.files) out << p.string() << "\n";
    const auto& box = r.document.rating_box;
    out << fmt::format("rating: {} | target price: {} | current price: {} | fact audit: {} ({} claims)\n",
                       valuation::to_string(box.rating), display::per_share(box.target_price, r.document.currency),
                       display::per_share(box.current_price, r.document.currency),
                       r.audit.passed() ? "passed" : "FAILED", r.audit.claims.size());
    return kExitOk;
}

int cmd_query(const Flags& f, const std::string& question, std::ostream& out) {
    auto c = build_config(f);
    c.cache = false;
    const auto data = pipeline::ingest(c);
    const auto table = metrics::build_metric_table(data.financials);
    auto provider = pipeline::make_provider(c.provider);
    const auto insight = agents::answer_financial_query(question, data.financials, table, *provider);
    out << "question: " << insight.question << "\n\n" << insight.answer;
    if (!insight.answer.empty() && insight.answer.back() != '\n') out << "\n";
    if (!insight.metric_refs.empty()) {
        out << "\nmetric references:\n";
        for (const auto& [name, period] : insight.metric_refs)
            out << "  " << metrics::to_string(name) << " " << period << "\n";
    }
    return kExitOk;
}

std::string subject_of(const std::string& report_text) {
    // the metadata comment carries "company: <name>" in both formats
    const auto start = report_text.find("<!-- eqr-report");
    if (start == std::string::npos) return "the company";
    const auto end = report_text.find("-->", start);
    const auto at = report_text.find("\ncompany: ", start);
    if (at == std::string::npos || at > end) return "the company";
    const auto line_end = report_text.find('\n', at + 1);
    return report_text.substr(at + 10, line_end - at - 10);
}

evaluation::JudgeMode judge_mode(const std::string& text) {
    const auto m = evaluation::parse_judge_mode(text);
    if (!m) throw UsageError("--judge-mode must be combined or per_dimension");
    return *m;
}

std::shared_ptr<agents::LlmProvider> judge_provider(const Flags& f) {
    pipeline::ProviderSettings s;
    if (!f.config.empty()) {
        const auto c = pipeline::RunConfig::load(f.config);
        s = c.judge ? *c.judge : c.provider;
    }
    if (!f.provider.empty()) s.kind = f.provider;
    if (!f.replay_file.empty()) s.replay_file = f.replay_file;
    if (s.kind == "replay" && !s.replay_file) throw UsageError("--replay-file is required with --provider replay");
    return pipeline::make_provider(s);
}

int cmd_evaluate(const Flags& f, const std::string& report_path, const std::string& mode, std::ostream& out) {
    const std::string text = read_file(report_path);
    auto judge = judge_provider(f);
    const auto m = judge_mode(mode);
    const auto score = evaluation::judge_report(text, fs::path(report_path).filename().string(), *judge,
                                                evaluation::Rubric::shipped(), m, subject_of(text));
    out << "report: " << score.report_id << "\njudge: " << score.judge << " (" << evaluation::to_string(m) << ")\n";
    for (auto d : evaluation::kDimensions)
        out << evaluation::to_string(d) << ": " << display::score(score.get(d)) << "\n";
    out << "\n" << evaluation::format_judge_response(score);
    return kExitOk;
}

std::vector<std::string> split_methods(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream in(text);
    for (std::string m; std::getline(in, m, ',');) {
        m.erase(0, m.find_first_not_of(' '));
        m.erase(m.find_last_not_of(' ') + 1);
        if (!m.empty()) out.push_back(m);
    }
    return out;
}

int cmd_stability(const Flags& f, int runs, const std::string& methods_text, const std::string& mode,
                  std::ostream& out) {
    if (f.config.empty()) throw UsageError("--config is required");
    const auto c = build_config(f);
    const auto methods = split_methods(methods_text);
    if (methods.empty()) throw UsageError("--methods lists no method");
    auto provider = pipeline::make_provider(c.provider);
    auto judge = c.judge ? pipeline::make_provider(*c.judge) : provider;
    if (!f.provider.empty()) judge = provider;

    evaluation::GeneratorRegistry registry;
    pipeline::register_generators(registry, c, provider);
    for (const auto& m : methods)
        if (!registry.has(m)) throw UsageError("--methods: unknown method " + m);

    const fs::path dir = c.output_dir / "stability";
    evaluation::StabilityOptions options;
    options.mode = judge_mode(mode);
    options.transcript_dir = dir;
    options.max_in_flight = c.agents.max_in_flight;
    const auto results = evaluation::run_stability(registry, methods, runs, *judge, options);

    fs::create_directories(dir);
    write_file_atomic(dir / "results.csv", evaluation::results_csv(results));
    write_file_atomic(dir / "aggregates.csv", evaluation::aggregates_csv(results));
    write_file_atomic(dir / "histogram.txt", evaluation::render_histogram(results));

    out << fmt::format("{:<10} {:<13} {:>3} {:>6} {:>6} {:>4} {:>4}\n", "method", "dimension", "n", "mean", "std",
                       "min", "max");
    for (const auto& r : results)
        for (auto d : evaluation::kDimensions) {
            const auto a = r.aggregate(d);
            out << fmt::format("{:<10} {:<13} {:>3} {:>6.2f} {:>6.2f} {:>4} {:>4}\n", r.method,
                               evaluation::to_string(d), a.n, a.mean, a.std, display::score(a.min),
                               display::score(a.max));
        }
    for (const char* name : {"results.csv", "aggregates.csv", "histogram.txt"}) out << (dir / name).string() << "\n";
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Equity research report engine", "eqr"};
    app.require_subcommand(1);
    Flags f;

    auto* ingest = app.add_subcommand("ingest", "Fetch and store a company's documents");
    add_source_flags(ingest, f);
    ingest->add_option("--output", f.output, "Output directory (document store beneath it)");

    bool display_form = false;
    auto* metrics_cmd = app.add_subcommand("metrics", "Print the metric table");
    add_source_flags(metrics_cmd, f);
    metrics_cmd->add_flag("--display", display_form, "Display formatting instead of the serialized table");

    auto* report_cmd = app.add_subcommand("report", "Generate the equity research report");
    add_source_flags(report_cmd, f);
    add_provider_flags(report_cmd, f);
    report_cmd->add_option("--output", f.output, "Output directory");
    report_cmd->add_option("--format", f.format, "Single output format")->check(CLI::IsMember({"markdown", "html"}));
    report_cmd->add_option("--as-of", f.as_of, "Report date (YYYY-MM-DD)");
    report_cmd->add_flag("--no-cache", f.no_cache, "Recompute every stage");

    std::string question;
    auto* query = app.add_subcommand("query", "Answer a question against the metric table");
    add_source_flags(query, f);
    add_provider_flags(query, f);
    query->add_option("--question", question, "Question text")->required();

    std::string report_path;
    std::string mode = "combined";
    auto* evaluate = app.add_subcommand("evaluate", "Score a report with the judge");
    evaluate->add_option("--report", report_path, "Report file (markdown or html)")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--config", f.config, "Run configuration supplying judge settings")->check(CLI::ExistingFile);
    add_provider_flags(evaluate, f);
    evaluate->add_option("--judge-mode", mode, "combined or per_dimension");

    int runs = 0;
    std::string methods = "pipeline,zero_shot,few_shot,plain_cot";
    auto* stability = app.add_subcommand("stability", "Repeat generation and judging per method");
    add_source_flags(stability, f);
    add_provider_flags(stability, f);
    stability->add_option("--runs", runs, "Runs per method (at least 2)")->required()->check(CLI::Range(2, 1000));
    stability->add_option("--methods", methods, "Comma-separated methods");
    stability->add_option("--output", f.output, "Output directory (stability/ beneath it)");
    stability->add_option("--judge-mode", mode, "combined or per_dimension");

    auto* version = app.add_subcommand("version", "Print the engine version");

    auto usage = [&](const std::string& message) {
        err << "error: " << message << "\n\n";
        const CLI::App* shown = &app;
        for (const auto* sub : app.get_subcommands()) shown = sub;
        err << shown->help();
        return kExitUsage;
    };

    if (!args.empty() && !args.front().empty() && args.front().front() != '-') {
        if (app.get_subcommand_no_throw(args.front()) == nullptr) return usage("unknown subcommand " + args.front());
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        const CLI::App* shown = &app;
        for (const auto* sub : app.get_subcommands()) shown = sub;
        out << shown->help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        return usage(e.what());
    }

    try {
        if (*version) {
            out << "eqr " << engine_version() << "\n";
            return kExitOk;
        }
        if (*ingest) return cmd_ingest(f, out);
        if (*metrics_cmd) return cmd_metrics(f, display_form, out);
        if (*report_cmd) return cmd_report(f, out, err);
        if (*query) return cmd_query(f, question, out);
        if (*evaluate) return cmd_evaluate(f, report_path, mode, out);
        if (*stability) return cmd_stability(f, runs, methods, mode, out);
    } catch (const UsageError& e) {
        return usage(e.what());
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitDomainError;
    } catch (const std::exception& e) {
        err << "error: internal failure: " << e.what() << "\n";
        return kExitDomainError;
    }
    return usage("no command given");
}

}  // namespace eqr::cli
