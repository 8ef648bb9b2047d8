#include "eqr/common/error.hpp"
#include "eqr/common/files.hpp"
#include "eqr/common/hashing.hpp"
#include "eqr/evaluation/evaluation.hpp"
#include "eqr/report/report.hpp"
#include "mock_report.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

using namespace eqr;
using namespace eqr::evaluation;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an eqr::Error";
    return ErrorCode::ConfigError;
}

std::string fig5_text() { return eqr::testing::read_text(eqr::testing::test_fixture_dir() / "judge" / "fig5_response.txt"); }

std::vector<EvaluationScore> table2_rows() {
    std::istringstream in(eqr::testing::read_text(eqr::testing::test_fixture_dir() / "judge" / "table2_reviewers.csv"));
    std::string line;
    std::getline(in, line);  // header
    std::vector<EvaluationScore> out;
    while (std::getline(in, line)) {
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        std::string reviewer;
        EvaluationScore s;
        row >> reviewer >> s.accuracy >> s.logicality >> s.storytelling;
        s.judge = "reviewer " + reviewer;
        out.push_back(s);
    }
    return out;
}

const std::string& wm_report_markdown() {
    static const std::string md =
        report::render(report::assemble_report(eqr::testing::wm_mock_chain().inputs()), report::Format::Markdown);
    return md;
}

std::size_t count(const std::string& haystack, const std::string& needle) {
    std::size_t n = 0;
    for (std::size_t p = 0; (p = haystack.find(needle, p)) != std::string::npos; p += needle.size()) ++n;
    return n;
}

}  // namespace

TEST(Rubric, ShippedFileIsPinned) {
    const auto text = read_file(eqr::testing::data_dir() / "rubric.txt");
    EXPECT_EQ(sha256_hex(text), "7c14742eb6f8125e5d0b643e095fecb1598878ee74a62e7723f73301e6b955f4");
    const Rubric& r = Rubric::shipped();
    for (Dimension d : kDimensions) {
        ASSERT_EQ(r.levels(d).size(), 11u);
        for (int s = 0; s <= 10; ++s) EXPECT_FALSE(r.text(d, s).empty());
    }
    EXPECT_EQ(r.text(Dimension::Accuracy, 10), "Perfect accuracy, no errors or inconsistencies.");
    EXPECT_EQ(r.text(Dimension::Logicality, 6), "Mostly logical but may lack depth in reasoning.");
    EXPECT_EQ(r.text(Dimension::Storytelling, 0), "No storytelling structure, entirely confusing.");
    EXPECT_EQ(r.describe(Dimension::Accuracy).substr(0, 4), "10: ");
}

TEST(Rubric, RejectsIncompleteFiles) {
    std::string full;
    for (Dimension d : kDimensions)
        for (int s = 0; s <= 10; ++s) full += std::string(to_string(d)) + "|" + std::to_string(s) + "|level\n";
    EXPECT_NO_THROW(Rubric::parse(full));
    EXPECT_EQ(code_of([&] { Rubric::parse(full.substr(0, full.rfind("storytelling|10"))); }), ErrorCode::ConfigError);
    EXPECT_EQ(code_of([&] { Rubric::parse(full + "accuracy|3|again\n"); }), ErrorCode::ConfigError);
    EXPECT_EQ(code_of([&] { Rubric::parse(full + "accuracy|11|beyond\n"); }), ErrorCode::ConfigError);
    EXPECT_EQ(code_of([&] { Rubric::parse(full + "clarity|3|unknown\n"); }), ErrorCode::ConfigError);
    EXPECT_EQ(code_of([&] { Rubric::parse(full + "accuracy|3\n"); }), ErrorCode::ConfigError);
    EXPECT_EQ(code_of([] { Rubric::load("/nonexistent/rubric.txt"); }), ErrorCode::ConfigError);
}

TEST(JudgePrompt, CarriesFormatDefinitionsAndRubric) {
    const auto p = build_judge_prompt(wm_report_markdown(), Rubric::shipped(), "Waste Management");
    EXPECT_EQ(p.task, "judge");
    for (const char* marker : {"[Accuracy] Score:", "[Logicality] Score:", "[Storytelling] Score:"})
        EXPECT_EQ(count(p.user_text, marker), 1u) << marker;
    EXPECT_EQ(count(p.user_text, "Provide a score from 0 to 10"), 3u);
    EXPECT_NE(p.user_text.find("evaluate the equity research report on Waste Management based on three"),
              std::string::npos);
    EXPECT_NE(p.user_text.find("Your answer format should be as follows:"), std::string::npos);
    const auto info = p.user_text.find("Information:");
    ASSERT_NE(info, std::string::npos);
    for (Dimension d : kDimensions)
        for (const auto& [score, text] : Rubric::shipped().levels(d)) {
            const auto at = p.user_text.find(std::to_string(score) + ": " + text);
            EXPECT_NE(at, std::string::npos) << text;
            EXPECT_GT(at, info);
        }
    ASSERT_NE(p.context("report"), nullptr);
    EXPECT_EQ(*p.context("report"), wm_report_markdown());
    EXPECT_EQ(p.render(), build_judge_prompt(wm_report_markdown(), Rubric::shipped(), "Waste Management").render());
    EXPECT_TRUE(eqr::testing::matches_golden("judge_prompt.txt",
                                             build_judge_prompt("<report>", Rubric::shipped(), "Waste Management").render()));
}

TEST(JudgePrompt, SingleDimensionForms) {
    const auto p = build_dimension_prompt("<report>", Rubric::shipped(), Dimension::Logicality);
    EXPECT_EQ(p.task, "judge.logicality");
    EXPECT_EQ(p.user_text.rfind("Evaluate the report based on logical coherence and assign a score from 0 to 10, "
                                "with 10 representing flawless coherence.",
                                0),
              0u);
    EXPECT_NE(p.user_text.find(Rubric::shipped().text(Dimension::Logicality, 3)), std::string::npos);
    EXPECT_EQ(p.user_text.find(Rubric::shipped().text(Dimension::Accuracy, 3)), std::string::npos);
    for (Dimension d : kDimensions) {
        EXPECT_TRUE(eqr::testing::matches_golden(
            "judge_" + std::string(to_string(d)) + "_prompt.txt",
            build_dimension_prompt("<report>", Rubric::shipped(), d).render()));
    }
}

TEST(ParseJudgeResponse, Fig5Layout) {
    const auto s = parse_judge_response(fig5_text());
    EXPECT_EQ(s.accuracy, 9.0);
    EXPECT_EQ(s.logicality, 8.0);
    EXPECT_EQ(s.storytelling, 7.0);
    EXPECT_EQ(s.comments.at(Dimension::Accuracy).rfind("Figures for revenue", 0), 0u);
    EXPECT_EQ(s.comments.at(Dimension::Storytelling).back(), '.');
    for (const auto& [d, c] : s.comments) EXPECT_EQ(c.find('['), std::string::npos);
}

TEST(ParseJudgeResponse, GrammarVariants) {
    const auto a = parse_judge_response("[Accuracy] Score: 9\nok\n[Logicality] Score: 8.5/10\nfine\n"
                                        "[Storytelling Ability] Score: 7\nmeh");
    EXPECT_EQ(a.accuracy, 9.0);
    EXPECT_EQ(a.logicality, 8.5);
    EXPECT_EQ(a.storytelling, 7.0);
    EXPECT_EQ(a.comments.at(Dimension::Logicality), "fine");
    const auto b = parse_judge_response("**[Accuracy] 6:**\nA\n\n**[Logicality] 5:** B\n\n**[storytelling] 4:**\nC\\\\");
    EXPECT_EQ(b.accuracy, 6.0);
    EXPECT_EQ(b.comments.at(Dimension::Logicality), "B");
    EXPECT_EQ(b.storytelling, 4.0);
    const auto c = parse_judge_response("Preamble.\n[Storytelling] 3:\nz\n[Accuracy] 10:\nx\n[Logicality] 0:\ny");
    EXPECT_EQ(c.accuracy, 10.0);
    EXPECT_EQ(c.logicality, 0.0);
    EXPECT_EQ(c.comments.at(Dimension::Storytelling), "z");
}

TEST(ParseJudgeResponse, Errors) {
    try {
        parse_judge_response("[Accuracy] 9:\nx\n[Logicality] 8:\ny\n");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MalformedResponse);
        EXPECT_EQ(e.detail("dimension"), "storytelling");
    }
    try {
        parse_judge_response("[Logicality] 8:\n[Storytelling] Score:\n");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.detail("dimension"), "accuracy");
    }
    EXPECT_EQ(code_of([] { parse_judge_response("[Accuracy] 11:\nx\n[Logicality] 8:\n[Storytelling] 7:\n"); }),
              ErrorCode::OutOfRangeScore);
    EXPECT_EQ(code_of([] { parse_judge_response("[Accuracy] 9:\n[Logicality] -1:\n[Storytelling] 7:\n"); }),
              ErrorCode::OutOfRangeScore);
    EXPECT_EQ(code_of([] { parse_judge_response(""); }), ErrorCode::MalformedResponse);
}

TEST(ParseJudgeResponse, RoundTripProperty) {
    std::mt19937_64 rng(7);
    const std::vector<std::string> words{"margins", "growth", "clear", "thin", "the", "report", "cash", "7%", "risk",
                                         "flow", "tables", "is", "uneven", "FY2023", "solid", "(mostly)"};
    for (int trial = 0; trial < 2000; ++trial) {
        EvaluationScore s;
        for (Dimension d : kDimensions) {
            s.set(d, static_cast<double>(rng() % 21) / 2.0);
            std::string comment;
            const int n = static_cast<int>(rng() % 12);
            for (int w = 0; w < n; ++w) {
                comment += (w ? (rng() % 7 == 0 ? "\n" : " ") : "") + words[rng() % words.size()];
            }
            s.comments[d] = comment;
        }
        const auto text = format_judge_response(s);
        const auto back = parse_judge_response(text);
        ASSERT_EQ(back.accuracy, s.accuracy) << text;
        ASSERT_EQ(back.logicality, s.logicality) << text;
        ASSERT_EQ(back.storytelling, s.storytelling) << text;
        ASSERT_EQ(back.comments, s.comments) << text;
        ASSERT_EQ(format_judge_response(back), text);
    }
}

TEST(Aggregate, Table2ReviewerRows) {
    const auto agg = aggregate_scores(table2_rows());
    const auto& acc = agg.at(Dimension::Accuracy);
    const auto& log = agg.at(Dimension::Logicality);
    const auto& sto = agg.at(Dimension::Storytelling);
    EXPECT_NEAR(acc.mean, 67.0 / 7.0, 1e-12);
    EXPECT_NEAR(log.mean, 65.5 / 7.0, 1e-12);
    EXPECT_NEAR(sto.mean, 58.5 / 7.0, 1e-12);
    // population std from an exact rational oracle
    EXPECT_TRUE(eqr::testing::close_rel(acc.std, 0.4948716593053935, 1e-12));
    EXPECT_TRUE(eqr::testing::close_rel(log.std, 0.44031528592635544, 1e-12));
    EXPECT_TRUE(eqr::testing::close_rel(sto.std, 1.1561724325884748, 1e-12));
    EXPECT_EQ(acc.n, 7u);
    EXPECT_EQ(sto.min, 7.0);
    EXPECT_EQ(sto.max, 10.0);
    EXPECT_EQ(log.min, 9.0);
}

TEST(Aggregate, OrderInvarianceAndDegenerateCases) {
    auto rows = table2_rows();
    const auto reference = aggregate_scores(rows);
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
        std::shuffle(rows.begin(), rows.end(), rng);
        EXPECT_EQ(aggregate_scores(rows), reference);
    }
    std::vector<double> xs;
    for (int i = 0; i < 50; ++i) xs.push_back(std::uniform_real_distribution<double>(0, 10)(rng));
    const auto a = aggregate(xs);
    std::reverse(xs.begin(), xs.end());
    EXPECT_EQ(aggregate(xs), a);

    const auto one = aggregate({8.5});
    EXPECT_EQ(one.mean, 8.5);
    EXPECT_EQ(one.std, 0.0);
    EXPECT_EQ(code_of([] { aggregate({}); }), ErrorCode::EmptyInput);
    EXPECT_EQ(code_of([] { aggregate_scores({}); }), ErrorCode::EmptyInput);
}

TEST(JudgeReport, MockJudgeModesAgree) {
    agents::MockProvider mock;
    JudgeTranscript t;
    const auto combined = judge_report(wm_report_markdown(), "wm", mock, Rubric::shipped(), JudgeMode::Combined,
                                       "Waste Management", &t);
    EXPECT_EQ(t.prompts.size(), 1u);
    EXPECT_EQ(parse_judge_response(t.combined_response()), [&] {
        auto s = combined;
        s.judge.clear();
        s.report_id.clear();
        return s;
    }());
    EXPECT_EQ(combined.judge, "mock");
    EXPECT_EQ(combined.report_id, "wm");
    // six headings, three tables: accuracy 5 + 2 + 3, logicality 4 + 5 + 1
    EXPECT_EQ(combined.accuracy, 10.0);
    EXPECT_EQ(combined.logicality, 10.0);
    JudgeTranscript per;
    const auto split = judge_report(wm_report_markdown(), "wm", mock, Rubric::shipped(), JudgeMode::PerDimension,
                                    "Waste Management", &per);
    EXPECT_EQ(per.prompts.size(), 3u);
    EXPECT_EQ(split.accuracy, combined.accuracy);
    EXPECT_EQ(split.logicality, combined.logicality);
    EXPECT_EQ(split.storytelling, combined.storytelling);
    EXPECT_EQ(parse_judge_response(per.combined_response()).storytelling, split.storytelling);
}

TEST(JudgeReport, FailuresBecomeJudgeFailure) {
    agents::ScriptedProvider broken("broken", [](const agents::PromptEnvelope&) -> std::string {
        throw std::runtime_error("socket closed");
    });
    try {
        judge_report("report", "r", broken, Rubric::shipped(), JudgeMode::Combined);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::JudgeFailure);
        EXPECT_EQ(e.detail("cause"), "ProviderFailure");
        EXPECT_EQ(e.detail("judge"), "broken");
    }
    agents::ScriptedProvider rambling("rambling", [](const agents::PromptEnvelope&) { return std::string("Nice."); });
    try {
        judge_report("report", "r", rambling, Rubric::shipped(), JudgeMode::Combined);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::JudgeFailure);
        EXPECT_EQ(e.detail("cause"), "MalformedResponse");
        EXPECT_EQ(e.detail("dimension"), "accuracy");
    }
    agents::MockProvider mock;
    EXPECT_EQ(code_of([&] { judge_report("  ", "r", mock, Rubric::shipped(), JudgeMode::Combined); }),
              ErrorCode::EmptyInput);
}

namespace {

// Known per-method, per-run judge scores; every value is exact in binary.
const std::map<std::string, std::vector<std::array<double, 3>>>& scripted_scores() {
    static const std::map<std::string, std::vector<std::array<double, 3>>> s{
        {"pipeline", {{9, 8, 8}, {8.5, 8.5, 7.5}, {9, 9, 8}, {9.5, 8.5, 8.5}}},
        {"zero_shot", {{6, 5, 4}, {7, 5, 5}, {6, 6, 4}, {7, 4, 5}}},
        {"few_shot", {{7, 6, 6}, {7, 6, 6}, {7, 6, 6}, {7, 6, 6}}},
    };
    return s;
}

GeneratorRegistry scripted_registry() {
    GeneratorRegistry g;
    for (const auto& [method, runs] : scripted_scores()) {
        const std::string m = method;
        g.add(m, [m](int run) { return "# Report\nmethod=" + m + " run=" + std::to_string(run) + "\n"; });
    }
    return g;
}

agents::ScriptedProvider scripted_judge() {
    return agents::ScriptedProvider("scripted-judge", [](const agents::PromptEnvelope& p) {
        const std::string& report = *p.context("report");
        const auto m0 = report.find("method=") + 7;
        const auto r0 = report.find(" run=");
        const std::string method = report.substr(m0, r0 - m0);
        const int run = std::stoi(report.substr(r0 + 5));
        const auto& s = scripted_scores().at(method).at(static_cast<std::size_t>(run));
        EvaluationScore score;
        score.accuracy = s[0];
        score.logicality = s[1];
        score.storytelling = s[2];
        for (Dimension d : kDimensions) score.comments[d] = method + " " + std::to_string(run);
        return format_judge_response(score);
    });
}

}  // namespace

TEST(RunStability, ScriptedJudgeAggregatesExactly) {
    auto judge = scripted_judge();
    eqr::testing::TempDir dir;
    StabilityOptions options;
    options.transcript_dir = dir.path();
    const std::vector<std::string> methods{"pipeline", "zero_shot", "few_shot"};
    const auto results = run_stability(scripted_registry(), methods, 4, judge, options);
    ASSERT_EQ(results.size(), 3u);
    EXPECT_EQ(judge.calls(), 12u);

    const auto& pipe = results[0];
    EXPECT_EQ(pipe.method, "pipeline");
    EXPECT_EQ(pipe.n_runs, 4u);
    EXPECT_EQ(pipe.samples.at(Dimension::Accuracy), (std::vector<double>{9, 8.5, 9, 9.5}));
    // hand-computed: accuracy sum 36 -> mean 9, squared deviations 0 + .25 + 0 + .25 over 4 -> var .125
    EXPECT_EQ(pipe.aggregate(Dimension::Accuracy).mean, 9.0);
    EXPECT_EQ(pipe.aggregate(Dimension::Accuracy).std, std::sqrt(0.125));
    // logicality 8, 8.5, 9, 8.5: mean 8.5, deviations .25 + 0 + .25 + 0 -> var .125
    EXPECT_EQ(pipe.aggregate(Dimension::Logicality).mean, 8.5);
    EXPECT_EQ(pipe.aggregate(Dimension::Logicality).std, std::sqrt(0.125));
    // storytelling 8, 7.5, 8, 8.5: mean 8, var .125
    EXPECT_EQ(pipe.aggregate(Dimension::Storytelling).mean, 8.0);
    EXPECT_EQ(pipe.aggregate(Dimension::Storytelling).std, std::sqrt(0.125));

    const auto& zero = results[1];
    EXPECT_EQ(zero.method, "zero_shot");
    EXPECT_EQ(zero.aggregate(Dimension::Accuracy).mean, 6.5);
    EXPECT_EQ(zero.aggregate(Dimension::Accuracy).std, 0.5);
    EXPECT_EQ(zero.aggregate(Dimension::Logicality).mean, 5.0);
    EXPECT_EQ(zero.aggregate(Dimension::Logicality).std, std::sqrt(0.5));
    EXPECT_EQ(zero.aggregate(Dimension::Storytelling).mean, 4.5);
    EXPECT_EQ(zero.aggregate(Dimension::Storytelling).std, 0.5);

    const auto& few = results[2];
    for (Dimension d : kDimensions) EXPECT_EQ(few.aggregate(d).std, 0.0);
    EXPECT_EQ(few.aggregate(Dimension::Accuracy).mean, 7.0);

    // every score has a transcript that re-parses to it
    for (const auto& r : results) {
        for (int run = 0; run < 4; ++run) {
            const auto t = read_transcript(transcript_path(dir.path(), r.method, run));
            EXPECT_EQ(t.header.at("method"), r.method);
            EXPECT_EQ(t.header.at("run"), std::to_string(run));
            EXPECT_EQ(t.header.at("judge"), "scripted-judge");
            EXPECT_EQ(t.header.at("prompt_sha256").size(), 64u);
            const auto parsed = parse_judge_response(t.response);
            for (Dimension d : kDimensions) EXPECT_EQ(parsed.get(d), r.samples.at(d)[static_cast<std::size_t>(run)]);
        }
    }
    EXPECT_NE(aggregates_csv(results).find("pipeline,accuracy,4,9,0.3535533905932738,8.5,9.5\n"), std::string::npos);
    EXPECT_EQ(results_csv(results).substr(0, 53), "method,dimension,run,score\npipeline,accuracy,0,9\npipe");
    const auto hist = render_histogram(results);
    EXPECT_NE(hist.find("pipeline accuracy (n=4, mean 9.00, std 0.35)\n   8 | # 1\n   9 | ### 3\n"), std::string::npos);
}

TEST(RunStability, PerDimensionModeMatchesCombined) {
    auto judge = scripted_judge();
    StabilityOptions options;
    options.mode = JudgeMode::PerDimension;
    options.max_in_flight = 1;
    const auto per = run_stability(scripted_registry(), {"pipeline"}, 4, judge, options);
    ASSERT_EQ(per.size(), 1u);
    EXPECT_EQ(judge.calls(), 12u);
    auto again = scripted_judge();
    EXPECT_EQ(per, run_stability(scripted_registry(), {"pipeline"}, 4, again));
}

TEST(RunStability, Preconditions) {
    auto judge = scripted_judge();
    EXPECT_EQ(code_of([&] { run_stability(scripted_registry(), {"pipeline"}, 1, judge); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([&] { run_stability(scripted_registry(), {"unknown"}, 2, judge); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([&] { run_stability(scripted_registry(), {}, 2, judge); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(judge.calls(), 0u);
}

TEST(RunStability, FailuresNameMethodAndRun) {
    GeneratorRegistry g = scripted_registry();
    g.add("flaky", [](int run) -> std::string {
        if (run == 1) throw Error(ErrorCode::ProviderFailure, "provider timed out");
        return "# Report\nmethod=pipeline run=0\n";
    });
    auto judge = scripted_judge();
    try {
        run_stability(g, {"pipeline", "flaky"}, 3, judge);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::GenerationFailure);
        EXPECT_EQ(e.detail("method"), "flaky");
        EXPECT_EQ(e.detail("run"), "1");
        EXPECT_EQ(e.detail("cause"), "ProviderFailure");
    }
    g.add("empty", [](int) { return std::string(" \n"); });
    EXPECT_EQ(code_of([&] { run_stability(g, {"empty"}, 2, judge); }), ErrorCode::GenerationFailure);

    agents::ScriptedProvider bad_judge("bad", [](const agents::PromptEnvelope& p) {
        return p.context("report")->find("run=1") != std::string::npos ? std::string("[Accuracy] 12:\nx\n[Logicality] 1:\ny\n[Storytelling] 1:\nz\n")
                                                                          : std::string("[Accuracy] 1:\nx\n[Logicality] 1:\ny\n[Storytelling] 1:\nz\n");
    });
    try {
        run_stability(scripted_registry(), {"zero_shot"}, 2, bad_judge);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::JudgeFailure);
        EXPECT_EQ(e.detail("method"), "zero_shot");
        EXPECT_EQ(e.detail("run"), "1");
        EXPECT_EQ(e.detail("cause"), "OutOfRangeScore");
    }
}

TEST(RunStability, MockBaselinesScoreBelowPipelineReport) {
    const auto chain = eqr::testing::wm_mock_chain();
    agents::MockProvider mock;
    GeneratorRegistry g;
    register_baselines(g,
                       {"WM", "Waste Management, Inc.", "ticker: WM",
                        agents::render_metric_table(chain.table, "USD")},
                       mock);
    g.add("pipeline", [&](int) { return wm_report_markdown(); });
    std::vector<std::string> methods{"pipeline"};
    for (auto m : kBaselineMethods) methods.emplace_back(m);
    const auto results = run_stability(g, methods, 2, mock);
    ASSERT_EQ(results.size(), 4u);
    for (std::size_t i = 1; i < results.size(); ++i) {
        EXPECT_GT(results[0].aggregate(Dimension::Logicality).mean, results[i].aggregate(Dimension::Logicality).mean)
            << results[i].method;
        EXPECT_EQ(results[i].aggregate(Dimension::Accuracy).std, 0.0);
    }
}
