#pragma once

#include "eqr/agents/prompt.hpp"
#include "eqr/agents/provider.hpp"

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace eqr::evaluation {

enum class Dimension { Accuracy, Logicality, Storytelling };

inline constexpr std::array<Dimension, 3> kDimensions{Dimension::Accuracy, Dimension::Logicality,
                                                      Dimension::Storytelling};

std::string_view to_string(Dimension d);  // "accuracy"
std::string_view header_label(Dimension d);  // "Accuracy", as in "[Accuracy] 9:"
std::optional<Dimension> parse_dimension(std::string_view text);  // either spelling

struct EvaluationScore {
    double accuracy = 0.0;
    double logicality = 0.0;
    double storytelling = 0.0;
    std::map<Dimension, std::string> comments;
    std::string judge;
    std::string report_id;

    double get(Dimension d) const;
    void set(Dimension d, double value);
    bool operator==(const EvaluationScore&) const = default;
};

/// Criterion text for each score 0..10 of each dimension.
class Rubric {
public:
    /// Lines "dimension|score|criterion"; '#' lines and blank lines are skipped.
    /// Throws ConfigError unless all 11 levels of all three dimensions are present once.
    static Rubric load(const std::filesystem::path& path);
    static Rubric parse(std::string_view text);
    static const Rubric& shipped();

    const std::string& text(Dimension d, int score) const;
    const std::map<int, std::string>& levels(Dimension d) const { return levels_.at(d); }
    /// Descending-score listing of one dimension, "10: ...\n9: ...".
    std::string describe(Dimension d) const;
    std::string fingerprint() const;

private:
    std::map<Dimension, std::map<int, std::string>> levels_;
};

// ---- prompts and parsing ----------------------------------------------------

enum class JudgeMode { Combined, PerDimension };
std::string_view to_string(JudgeMode m);
std::optional<JudgeMode> parse_judge_mode(std::string_view text);

/// Combined three-dimension prompt with the rubric appended to the
/// information block and the report as the "report" context block.
agents::PromptEnvelope build_judge_prompt(const std::string& report_text, const Rubric& rubric,
                                          const std::string& subject = "the company",
                                          const agents::PromptLibrary* prompts = nullptr);
/// Single-dimension prompt; its answer carries only that dimension's header.
agents::PromptEnvelope build_dimension_prompt(const std::string& report_text, const Rubric& rubric, Dimension d,
                                              const agents::PromptLibrary* prompts = nullptr);

/// Accepts "[Accuracy] Score: 9", "[Accuracy] Score: 9/10", "[Accuracy] 9:" and
/// markdown emphasis around the header. Comments run to the next header.
/// Throws MalformedResponse (detail "dimension": first missing) or OutOfRangeScore.
EvaluationScore parse_judge_response(std::string_view text);

struct DimensionReading {
    double score = 0.0;
    std::string comment;
};
/// Only `d` is required; other headers, if any, are ignored.
DimensionReading parse_dimension_response(std::string_view text, Dimension d);

/// The "[Accuracy] 9:\ncomment\n\n..." layout that parse_judge_response reads back.
std::string format_judge_response(const EvaluationScore& score);

struct JudgeTranscript {
    std::vector<agents::PromptEnvelope> prompts;
    std::vector<std::string> responses;
    /// Responses joined in dimension order; parses to the recorded score.
    std::string combined_response() const;
};

/// Judges one report. Provider errors and unparseable answers raise JudgeFailure
/// carrying the underlying code as detail "cause".
EvaluationScore judge_report(const std::string& report_text, const std::string& report_id,
                             agents::LlmProvider& judge, const Rubric& rubric, JudgeMode mode,
                             const std::string& subject = "the company", JudgeTranscript* transcript = nullptr,
                             const agents::PromptLibrary* prompts = nullptr);

// ---- aggregation ------------------------------------------------------------

struct DimensionAggregate {
    std::size_t n = 0;
    double mean = 0.0;
    double std = 0.0;  // population (divides by n)
    double min = 0.0;
    double max = 0.0;

    bool operator==(const DimensionAggregate&) const = default;
};

/// Sample statistics over values summed in sorted order, so the result
/// does not depend on input order. Throws EmptyInput.
DimensionAggregate aggregate(std::vector<double> samples);
std::map<Dimension, DimensionAggregate> aggregate_scores(const std::vector<EvaluationScore>& scores);

// ---- stability --------------------------------------------------------------

/// Produces the report text for one run of a method.
using Generator = std::function<std::string(int run)>;

class GeneratorRegistry {
public:
    void add(const std::string& method, Generator generator);
    bool has(const std::string& method) const { return generators_.count(method) > 0; }
    const Generator& get(const std::string& method) const;
    std::vector<std::string> methods() const;

private:
    std::map<std::string, Generator> generators_;
};

inline constexpr std::array<std::string_view, 3> kBaselineMethods{"zero_shot", "few_shot", "plain_cot"};

/// Single-prompt baselines: the "baseline_<method>" template with the
/// company block and the full metric table as context.
struct BaselineContext {
    std::string ticker;
    std::string company_name;
    std::string company_block;
    std::string metric_table;
};
void register_baselines(GeneratorRegistry& registry, BaselineContext context, agents::LlmProvider& provider,
                        const agents::PromptLibrary* prompts = nullptr);

struct StabilityResult {
    std::string method;
    std::size_t n_runs = 0;
    std::map<Dimension, std::vector<double>> samples;  // indexed by run

    /// Derived from samples on every call.
    DimensionAggregate aggregate(Dimension d) const;
    bool operator==(const StabilityResult&) const = default;
};

struct StabilityOptions {
    JudgeMode mode = JudgeMode::Combined;
    std::string subject = "the company";
    std::size_t max_in_flight = 4;
    std::optional<std::filesystem::path> transcript_dir;  // transcripts/<method>/<run>.txt beneath it
    const Rubric* rubric = nullptr;                        // null selects the shipped rubric
    const agents::PromptLibrary* prompts = nullptr;
};

/// Generates n_runs reports per method and judges each. Throws InvalidArgument
/// for n_runs < 2 or an unregistered method; GenerationFailure / JudgeFailure
/// carry "method" and "run".
std::vector<StabilityResult> run_stability(const GeneratorRegistry& registry, const std::vector<std::string>& methods,
                                           int n_runs, agents::LlmProvider& judge,
                                           const StabilityOptions& options = {});

struct Transcript {
    std::map<std::string, std::string> header;  // "# key: value" preamble lines
    std::string response;
};
Transcript read_transcript(const std::filesystem::path& path);
std::filesystem::path transcript_path(const std::filesystem::path& dir, const std::string& method, int run);

/// "method,dimension,run,score" rows.
std::string results_csv(const std::vector<StabilityResult>& results);
/// "method,dimension,n,mean,std_population,min,max" rows.
std::string aggregates_csv(const std::vector<StabilityResult>& results);
/// Text histogram of integer score bins per method and dimension.
std::string render_histogram(const std::vector<StabilityResult>& results);

}  // namespace eqr::evaluation
