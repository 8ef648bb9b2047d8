#include "eqr/evaluation/evaluation.hpp"

#include "eqr/common/concurrency.hpp"
#include "eqr/common/display.hpp"
#include "eqr/common/error.hpp"
#include "eqr/common/files.hpp"
#include "eqr/common/hashing.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace eqr::evaluation {

namespace {

std::string shortest(double v) { return fmt::format("{}", v); }

std::string with_run(const Error& e, const std::string& what, const std::string& method, int run) {
    return fmt::format("{} failed for method {} run {}: {}", what, method, run, e.message());
}

}  // namespace

DimensionAggregate aggregate(std::vector<double> samples) {
    if (samples.empty()) throw Error(ErrorCode::EmptyInput, "cannot aggregate an empty sample");
    std::sort(samples.begin(), samples.end());
    DimensionAggregate a;
    a.n = samples.size();
    const double n = static_cast<double>(a.n);
    a.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : samples) ss += (x - a.mean) * (x - a.mean);
    a.std = std::sqrt(ss / n);
    a.min = samples.front();
    a.max = samples.back();
    return a;
}

std::map<Dimension, DimensionAggregate> aggregate_scores(const std::vector<EvaluationScore>& scores) {
    if (scores.empty()) throw Error(ErrorCode::EmptyInput, "cannot aggregate zero scores");
    std::map<Dimension, DimensionAggregate> out;
    for (Dimension d : kDimensions) {
        std::vector<double> xs;
        xs.reserve(scores.size());
        for (const auto& s : scores) xs.push_back(s.get(d));
        out[d] = aggregate(std::move(xs));
    }
    return out;
}

DimensionAggregate StabilityResult::aggregate(Dimension d) const { return evaluation::aggregate(samples.at(d)); }

void GeneratorRegistry::add(const std::string& method, Generator generator) {
    generators_[method] = std::move(generator);
}

const Generator& GeneratorRegistry::get(const std::string& method) const {
    auto it = generators_.find(method);
    if (it == generators_.end()) {
        throw Error(ErrorCode::InvalidArgument, "no generator registered for method", {{"method", method}});
    }
    return it->second;
}

std::vector<std::string> GeneratorRegistry::methods() const {
    std::vector<std::string> out;
    for (const auto& [m, g] : generators_) out.push_back(m);
    return out;
}

void register_baselines(GeneratorRegistry& registry, BaselineContext context, agents::LlmProvider& provider,
                        const agents::PromptLibrary* prompts) {
    const auto& lib = prompts ? *prompts : agents::PromptLibrary::shipped();
    for (std::string_view method : kBaselineMethods) {
        const std::string m(method);
        registry.add(m, [&lib, &provider, context, m](int) {
            agents::PromptEnvelope p;
            p.task = "baseline." + m;
            p.system_text = lib.get("system");
            p.user_text = lib.render("baseline_" + m, {{"company", context.company_name}, {"ticker", context.ticker}});
            p.context_blocks = {{"company", context.company_block}, {"metric_table", context.metric_table}};
            p.max_tokens = 2048;
            return agents::invoke(provider, p);
        });
    }
}

std::filesystem::path transcript_path(const std::filesystem::path& dir, const std::string& method, int run) {
    return dir / "transcripts" / method / (std::to_string(run) + ".txt");
}

Transcript read_transcript(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    Transcript t;
    std::size_t start = 0;
    // "# key: value" lines, one blank line, then the response verbatim
    while (start < text.size() && text.compare(start, 2, "# ") == 0) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        const std::string line = text.substr(start + 2, end - start - 2);
        const auto colon = line.find(": ");
        if (colon != std::string::npos) t.header[line.substr(0, colon)] = line.substr(colon + 2);
        start = end + 1;
    }
    if (start < text.size() && text[start] == '\n') ++start;
    t.response = start < text.size() ? text.substr(start) : std::string();
    return t;
}

std::vector<StabilityResult> run_stability(const GeneratorRegistry& registry, const std::vector<std::string>& methods,
                                           int n_runs, agents::LlmProvider& judge, const StabilityOptions& options) {
    if (n_runs < 2) {
        throw Error(ErrorCode::InvalidArgument, "stability needs at least two runs per method",
                    {{"n_runs", std::to_string(n_runs)}});
    }
    if (methods.empty()) throw Error(ErrorCode::InvalidArgument, "stability needs at least one method");
    for (const auto& m : methods) registry.get(m);
    const Rubric& rubric = options.rubric ? *options.rubric : Rubric::shipped();

    const std::size_t runs = static_cast<std::size_t>(n_runs);
    std::vector<EvaluationScore> scores(methods.size() * runs);
    for_each_bounded(scores.size(), options.max_in_flight, [&](std::size_t i) {
        const std::string& method = methods[i / runs];
        const int run = static_cast<int>(i % runs);
        const Error::Details where{{"method", method}, {"run", std::to_string(run)}};
        std::string report;
        try {
            report = registry.get(method)(run);
        } catch (const Error& e) {
            auto details = e.details();
            details.insert(where.begin(), where.end());
            details["cause"] = std::string(to_string(e.code()));
            throw Error(ErrorCode::GenerationFailure, with_run(e, "generation", method, run), details);
        } catch (const std::exception& e) {
            auto details = where;
            details["cause"] = e.what();
            throw Error(ErrorCode::GenerationFailure,
                        fmt::format("generation failed for method {} run {}: {}", method, run, e.what()), details);
        }
        if (report.find_first_not_of(" \t\r\n") == std::string::npos) {
            throw Error(ErrorCode::GenerationFailure, "generator returned an empty report", where);
        }
        JudgeTranscript transcript;
        try {
            scores[i] = judge_report(report, method + "/" + std::to_string(run), judge, rubric, options.mode,
                                     options.subject, &transcript, options.prompts);
        } catch (const Error& e) {
            auto details = e.details();
            details.insert(where.begin(), where.end());
            throw Error(ErrorCode::JudgeFailure, with_run(e, "judging", method, run), details);
        }
        if (options.transcript_dir) {
            std::string prompt_hashes;
            for (const auto& p : transcript.prompts) prompt_hashes += (prompt_hashes.empty() ? "" : ",") + p.hash();
            std::string body = "# method: " + method + "\n# run: " + std::to_string(run) + "\n# judge: " +
                               judge.name() + "\n# mode: " + std::string(to_string(options.mode)) +
                               "\n# report_sha256: " + sha256_hex(report) + "\n# prompt_sha256: " + prompt_hashes +
                               "\n\n";
            body += transcript.combined_response();
            const auto path = transcript_path(*options.transcript_dir, method, run);
            std::filesystem::create_directories(path.parent_path());
            write_file_atomic(path, body);
        }
    });

    std::vector<StabilityResult> out;
    for (std::size_t m = 0; m < methods.size(); ++m) {
        StabilityResult r;
        r.method = methods[m];
        r.n_runs = runs;
        for (Dimension d : kDimensions) {
            auto& xs = r.samples[d];
            for (std::size_t k = 0; k < runs; ++k) xs.push_back(scores[m * runs + k].get(d));
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::string results_csv(const std::vector<StabilityResult>& results) {
    std::string out = "method,dimension,run,score\n";
    for (const auto& r : results)
        for (Dimension d : kDimensions) {
            const auto& xs = r.samples.at(d);
            for (std::size_t k = 0; k < xs.size(); ++k)
                out += fmt::format("{},{},{},{}\n", r.method, to_string(d), k, shortest(xs[k]));
        }
    return out;
}

std::string aggregates_csv(const std::vector<StabilityResult>& results) {
    std::string out = "method,dimension,n,mean,std_population,min,max\n";
    for (const auto& r : results)
        for (Dimension d : kDimensions) {
            const auto a = r.aggregate(d);
            out += fmt::format("{},{},{},{},{},{},{}\n", r.method, to_string(d), a.n, shortest(a.mean),
                               shortest(a.std), shortest(a.min), shortest(a.max));
        }
    return out;
}

std::string render_histogram(const std::vector<StabilityResult>& results) {
    std::string out;
    for (const auto& r : results) {
        for (Dimension d : kDimensions) {
            const auto& xs = r.samples.at(d);
            const auto a = r.aggregate(d);
            out += fmt::format("{} {} (n={}, mean {:.2f}, std {:.2f})\n", r.method, to_string(d), a.n, a.mean, a.std);
            std::array<int, 11> bins{};
            for (double x : xs) bins[static_cast<std::size_t>(std::clamp(std::floor(x), 0.0, 10.0))]++;
            const int lo = static_cast<int>(std::floor(a.min));
            const int hi = static_cast<int>(std::clamp(std::floor(a.max), 0.0, 10.0));
            for (int b = lo; b <= hi; ++b)
                out += fmt::format("  {:>2} | {} {}\n", b, std::string(static_cast<std::size_t>(bins[b]), '#'), bins[b]);
        }
    }
    return out;
}

}  // namespace eqr::evaluation
