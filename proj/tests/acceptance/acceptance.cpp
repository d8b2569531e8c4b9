// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "promodel/conversion/formats.hpp"
#include "promodel/conversion/net_language.hpp"
#include "promodel/conversion/soundness.hpp"
#include "promodel/dsl/interpret.hpp"
#include "promodel/orchestrator/orchestrator.hpp"
#include "promodel/semantics/language.hpp"

#include "adversarial.hpp"
#include "random_models.hpp"
#include "scenarios.hpp"
#include "unsound_nets.hpp"

using namespace promodel;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

Outcome fail(std::string detail) { return {false, std::move(detail)}; }

Outcome listing() {
    const auto start = Clock::now();
    const auto analysis = dsl::analyze(support::bicycle_program());
    if (!analysis.ok()) {
        return fail("audit rejected the program: " + analysis.violations.front().message);
    }
    const auto model = dsl::interpret(*analysis.program);
    const auto activities = powl::count_activities(model);
    if (model.kind() != powl::Kind::PartialOrder) {
        return fail("root is not a partial order");
    }
    const auto& root = model.as<powl::PartialOrder>();
    const auto violations = powl::validate(model);
    const auto report = conversion::check_soundness(conversion::to_petri_net(model));
    const double elapsed = seconds_since(start);
    const bool pass = activities == 12 && root.nodes.size() == 3 && root.edges.size() == 2 && violations.empty() &&
                      report.sound && elapsed < 1.0;
    char detail[160];
    std::snprintf(detail, sizeof detail, "%zu activities, root %zu nodes / %zu edges, %zu violations, %s, %.3f s",
                  activities, root.nodes.size(), root.edges.size(), violations.size(), report.sound ? "sound" : "unsound",
                  elapsed);
    return {pass, detail};
}

Outcome soundness_by_construction() {
    const auto start = Clock::now();
    std::size_t failures = 0;
    std::string first;
    for (unsigned seed = 0; seed < 1000; ++seed) {
        support::RandomModelGenerator gen(seed);
        const auto model = gen.next();
        const auto report = conversion::check_soundness(conversion::to_petri_net(model));
        if (!report.sound) {
            if (failures++ == 0) {
                first = "seed " + std::to_string(seed) + ": " + report.violations.front().detail;
            }
        }
    }
    const double elapsed = seconds_since(start);
    char detail[120];
    std::snprintf(detail, sizeof detail, "1000 models, %zu unsound, %.1f s", failures, elapsed);
    return {failures == 0 && elapsed < 60.0, failures ? std::string(detail) + "; " + first : detail};
}

Outcome oracle_equivalence() {
    const auto start = Clock::now();
    support::RandomModelParams params;
    params.activity_budget = 10;
    std::size_t mismatches = 0;
    std::size_t traces = 0;
    std::string first;
    for (unsigned seed = 0; seed < 300; ++seed) {
        support::RandomModelGenerator gen(seed, params);
        const auto model = gen.next();
        // one model in this sample has about 400k traces; the default caps are sized for interactive use
        semantics::LanguageOptions language_options;
        language_options.cap = 2000000;
        conversion::NetLanguageOptions options;
        options.max_len = 10;
        options.max_loop = 2;
        options.state_cap = 2000000;
        const auto expected = semantics::bounded_language(model, 2, 10, language_options);
        const auto actual = conversion::bounded_net_language(conversion::to_petri_net(model), options);
        traces += expected.size();
        if (expected != actual && mismatches++ == 0) {
            first = "seed " + std::to_string(seed);
        }
    }
    const double elapsed = seconds_since(start);
    char detail[160];
    std::snprintf(detail, sizeof detail, "300 models, %zu traces compared, %zu mismatches, %.1f s", traces, mismatches,
                  elapsed);
    return {mismatches == 0 && elapsed < 120.0, mismatches ? std::string(detail) + "; first at " + first : detail};
}

Outcome unsound_baselines() {
    const auto choice = conversion::check_soundness(support::xor_split_and_join_net());
    const auto end = conversion::check_soundness(support::unreachable_end_net());
    const bool pass = !choice.sound && choice.has(conversion::SoundnessIssue::CannotComplete) && !end.sound &&
                      end.has(conversion::SoundnessIssue::CannotComplete);
    return {pass, std::string("xor-split/and-join: ") + (choice.sound ? "sound" : "unsound") +
                      (choice.has(conversion::SoundnessIssue::CannotComplete) ? " (CannotComplete)" : "") +
                      "; unreachable end: " + (end.sound ? "sound" : "unsound") +
                      (end.has(conversion::SoundnessIssue::CannotComplete) ? " (CannotComplete)" : "")};
}

nlohmann::json turn_record(const orchestrator::Conversation& c) { return orchestrator::to_json(c.turns.back()); }

Outcome error_loop_thresholds() {
    const auto templ = support::default_template();
    const std::string shared = support::read_file(support::scenario_dir("shared_submodel").string() + "/responses/001.txt");
    const std::string forbidden = "```python\nimport os\nfinal_model = None\n```";

    auto adjustable = [&] {
        orchestrator::ScriptedProvider provider([&](const prompting::History&, std::size_t) { return shared; });
        auto c = orchestrator::generate("A process.", provider, {}, templ);
        return std::make_pair(c, provider.calls());
    };
    auto critical = [&] {
        orchestrator::ScriptedProvider provider([&](const prompting::History&, std::size_t) { return forbidden; });
        auto c = orchestrator::generate("A process.", provider, {}, templ);
        return std::make_pair(c, provider.calls());
    };

    const auto [a1, a_calls] = adjustable();
    const auto [a2, a_calls2] = adjustable();
    const auto [c1, c_calls] = critical();
    const auto [c2, c_calls2] = critical();
    const auto& at = a1.turns.back();
    const auto& ct = c1.turns.back();
    const bool auto_resolved = std::any_of(at.diagnostics.begin(), at.diagnostics.end(),
                                           [](const auto& d) { return d.auto_resolved; });
    const bool adjustable_ok = a1.status == orchestrator::Status::Succeeded && at.adjustable_rounds == 2 &&
                               a_calls == 3 && auto_resolved && a1.versions.size() == 1 &&
                               powl::validate(a1.versions[0].model).empty();
    const bool critical_ok = c1.status == orchestrator::Status::Failed && ct.critical_rounds == 5 && c_calls == 6 &&
                             c1.versions.empty();
    const bool deterministic = turn_record(a1) == turn_record(a2) && turn_record(c1) == turn_record(c2) &&
                               a_calls == a_calls2 && c_calls == c_calls2;
    char detail[200];
    std::snprintf(detail, sizeof detail,
                  "adjustable: %zu repair rounds then auto-resolved (%zu calls); critical: failed after %zu repair "
                  "rounds (%zu calls); %s",
                  at.adjustable_rounds, a_calls, ct.critical_rounds, c_calls,
                  deterministic ? "deterministic" : "NOT deterministic");
    return {adjustable_ok && critical_ok && deterministic, detail};
}

bool has_label(const powl::PowlModel& m, const std::string& label) {
    const auto labels = powl::activity_labels(m);
    return std::find(labels.begin(), labels.end(), label) != labels.end();
}

Outcome replay_end_to_end() {
    const auto shop = support::run_scenario("online_shop");
    const auto hotel = support::run_scenario("hotel");
    const auto& s = shop.conversation;
    const auto& h = hotel.conversation;

    bool shop_ok = s.status == orchestrator::Status::Succeeded && s.versions.size() == 3;
    bool skip_reward = false;
    bool reward_before = true;
    if (shop_ok) {
        for (const auto& t : semantics::bounded_language(s.versions[2].model, 1, 10)) {
            skip_reward = skip_reward || std::find(t.begin(), t.end(), "Select free reward") == t.end();
        }
        for (const auto& t : semantics::bounded_language(s.versions[1].model, 1, 10)) {
            reward_before = reward_before && std::find(t.begin(), t.end(), "Select free reward") != t.end();
        }
        shop_ok = skip_reward && reward_before && has_label(s.versions[1].model, "Add Items");
    }
    bool hotel_ok = h.status == orchestrator::Status::Succeeded && h.versions.size() == 3;
    if (hotel_ok) {
        hotel_ok = !has_label(h.versions[0].model, "Prepare food") && has_label(h.versions[1].model, "Prepare food") &&
                   has_label(h.versions[2].model, "Tip waiter");
    }
    bool all_sound = true;
    for (const auto* c : {&s, &h}) {
        for (const auto& v : c->versions) {
            all_sound = all_sound && conversion::check_soundness(conversion::to_petri_net(v.model)).sound;
        }
    }
    const bool exhausted = shop.responses_used == shop.responses_available &&
                           hotel.responses_used == hotel.responses_available;
    char detail[200];
    std::snprintf(detail, sizeof detail,
                  "online shop: %s, %zu versions, reward skippable after 2nd feedback: %s; hotel: %s, %zu versions, "
                  "'Prepare food' after 1st feedback: %s",
                  to_string(s.status).data(), s.versions.size(), skip_reward ? "yes" : "no", to_string(h.status).data(),
                  h.versions.size(),
                  h.versions.size() > 1 && has_label(h.versions[1].model, "Prepare food") ? "yes" : "no");
    return {shop_ok && hotel_ok && all_sound && exhausted, detail};
}

Outcome adversarial_corpus() {
    const auto& programs = support::adversarial_programs();
    std::size_t rejected = 0;
    std::size_t interpreted = 0;
    std::size_t non_critical = 0;
    orchestrator::LoopConfig config;
    for (const auto& program : programs) {
        const auto attempt = orchestrator::detail::evaluate("```python\n" + program + "\n```", config, 1);
        const bool blocked_early =
            !attempt.problems.empty() && std::all_of(attempt.problems.begin(), attempt.problems.end(), [](const auto& d) {
                return d.stage == orchestrator::Stage::Extraction || d.stage == orchestrator::Stage::Parse ||
                       d.stage == orchestrator::Stage::Audit;
            });
        rejected += blocked_early;
        interpreted += attempt.model.has_value() || std::any_of(attempt.problems.begin(), attempt.problems.end(),
                                                                [](const auto& d) {
                                                                    return d.stage == orchestrator::Stage::Interpret;
                                                                });
        non_critical += std::any_of(attempt.problems.begin(), attempt.problems.end(), [](const auto& d) {
            return d.category != orchestrator::Category::Critical;
        });
    }
    char detail[160];
    std::snprintf(detail, sizeof detail, "%zu programs, %zu rejected at parse/audit, %zu non-critical, %zu interpreted",
                  programs.size(), rejected, non_critical, interpreted);
    return {programs.size() >= 50 && rejected == programs.size() && non_critical == 0 && interpreted == 0, detail};
}

Outcome export_determinism() {
    const auto start = Clock::now();
    std::size_t differing = 0;
    std::size_t broken = 0;
    for (unsigned seed = 0; seed < 1000; ++seed) {
        support::RandomModelGenerator gen(seed);
        const auto model = gen.next();
        const auto bpmn = conversion::to_bpmn(model);
        broken += !conversion::bpmn_problems(bpmn).empty();
        if (seed < 200) {
            // a rebuilt model with fresh node identities must serialize identically
            support::RandomModelGenerator again(seed);
            const auto twin = again.next();
            for (auto f : {conversion::Format::PowlJson, conversion::Format::Pnml, conversion::Format::Bpmn}) {
                const auto a = conversion::render(model, f);
                differing += a != conversion::render(model, f) || a != conversion::render(twin, f);
            }
        }
    }
    char detail[160];
    std::snprintf(detail, sizeof detail,
                  "200 models x 3 formats, %zu differing; 1000 BPMN exports, %zu with integrity problems; %.1f s",
                  differing, broken, seconds_since(start));
    return {differing == 0 && broken == 0, detail};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"Listing program: 12 activities, 3-node/2-edge root, valid, sound, < 1 s", listing},
        {"Soundness by construction: 1000 random models, < 60 s", soundness_by_construction},
        {"Oracle equivalence: bounded_language vs net language, 300 models, < 120 s", oracle_equivalence},
        {"Unsound baselines report CannotComplete", unsound_baselines},
        {"Error-loop thresholds: 2 adjustable, 5 critical, deterministic", error_loop_thresholds},
        {"Replay end-to-end: online shop and hotel conversations", replay_end_to_end},
        {"Security audit: adversarial corpus rejected as Critical, never interpreted", adversarial_corpus},
        {"Serialization determinism and BPMN integrity", export_determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome outcome;
        try {
            outcome = criteria[i].second();
        } catch (const std::exception& e) {
            outcome = fail(std::string("exception: ") + e.what());
        }
        failed += !outcome.pass;
        std::printf("%s  [%zu] %s -- %s\n", outcome.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    outcome.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
    return failed;
}
