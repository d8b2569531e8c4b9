#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <filesystem>
#include <future>
#include <thread>

#include <unistd.h>

#include "promodel/conversion/soundness.hpp"
#include "promodel/service/server.hpp"

#include "scenarios.hpp"

using namespace promodel;
using nlohmann::json;

namespace {

std::filesystem::path temp_dir() {
    static std::atomic<int> counter{0};
    auto dir = std::filesystem::temp_directory_path() /
               ("promodel-service-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

service::ServiceConfig replay_config(const std::string& scenario, const std::string& store = {}) {
    service::ServiceConfig config;
    config.provider_kind = "replay";
    config.replay_dir = (support::scenario_dir(scenario) / "responses").string();
    config.templates_dir = support::source_path("templates");
    config.store_path = store;
    return config;
}

std::string scenario_text(const std::string& scenario, const std::string& file) {
    return support::read_file((support::scenario_dir(scenario) / file).string());
}

struct Running {
    std::unique_ptr<service::Service> service;
    std::unique_ptr<httplib::Client> client;

    explicit Running(std::unique_ptr<service::Service> s) : service(std::move(s)) {
        const int port = service->start();
        client = std::make_unique<httplib::Client>("127.0.0.1", port);
        client->set_read_timeout(60, 0);
    }

    httplib::Result post(const std::string& path, const json& body) {
        return client->Post(path, body.dump(), "application/json");
    }
};

Running replay_server(const std::string& scenario, const std::string& store = {}) {
    return Running(std::make_unique<service::Service>(replay_config(scenario, store)));
}

json body_of(const httplib::Result& r) { return json::parse(r->body); }

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool has_label(const powl::PowlModel& model, const std::string& label) {
    for (const auto& l : powl::activity_labels(model)) {
        if (lower(l) == lower(label)) {
            return true;
        }
    }
    return false;
}

} // namespace

TEST(ServiceConfig, JsonThenEnvironment) {
    service::ServiceConfig config;
    service::apply_json(config, json::parse(R"({"provider": {"kind": "replay", "replay_dir": "/x", "model": "m"},
                                                "loop": {"max_critical": 3, "max_adjustable": 1},
                                                "store": {"path": "/tmp/s.jsonl"}, "listen": {"address": "0.0.0.0:9"}})"));
    EXPECT_EQ(config.provider_kind, "replay");
    EXPECT_EQ(config.provider_model, "m");
    EXPECT_EQ(config.max_critical, 3u);
    EXPECT_EQ(config.max_adjustable, 1u);
    EXPECT_EQ(config.store_path, "/tmp/s.jsonl");
    service::apply_environment(config, [](const char* name) -> const char* {
        if (std::string(name) == "PROMODEL_MAX_CRITICAL") return "7";
        if (std::string(name) == "PROMODEL_PROVIDER_MODEL") return "other";
        return nullptr;
    });
    EXPECT_EQ(config.max_critical, 7u);
    EXPECT_EQ(config.provider_model, "other");
    EXPECT_EQ(config.loop_config().max_critical_attempts, 7u);
    EXPECT_EQ(config.loop_config().settings.model, "other");
}

TEST(ServiceConfig, RejectsBadValues) {
    service::ServiceConfig config;
    EXPECT_THROW(service::apply_json(config, json::parse(R"({"loop": {"max_critical": "five"}})")), Error);
    EXPECT_THROW(service::apply_json(config, json::parse(R"({"provider": 3})")), Error);
    EXPECT_THROW(service::apply_environment(config, [](const char*) -> const char* { return "-1"; }), Error);
    config = {};
    config.provider_kind = "carrier-pigeon";
    EXPECT_THROW(service::check(config), Error);
    config.provider_kind = "replay";
    EXPECT_THROW(service::check(config), Error);
    EXPECT_THROW(service::parse_address("8080"), Error);
    EXPECT_THROW(service::parse_address("host:99999"), Error);
    EXPECT_EQ(service::parse_address("0.0.0.0:8080").port, 8080);
}

TEST(ServiceConfig, LoadsFile) {
    const auto dir = temp_dir();
    support::write_file((dir / "c.json").string(), R"({"provider": {"kind": "replay", "replay_dir": "r"}})");
    const auto config = service::load_config((dir / "c.json").string());
    EXPECT_EQ(config.provider_kind, "replay");
    EXPECT_THROW(service::load_config((dir / "missing.json").string()), Error);
    support::write_file((dir / "bad.json").string(), "{nope");
    EXPECT_THROW(service::load_config((dir / "bad.json").string()), Error);
}

TEST(Service, OnlineShopGeneratesSoundModel) {
    auto server = replay_server("online_shop");
    const auto r = server.post("/conversations", {{"description", scenario_text("online_shop", "description.txt")}});
    ASSERT_TRUE(r);
    ASSERT_EQ(r->status, 200) << r->body;
    EXPECT_EQ(r->get_header_value("Content-Type"), "application/json");
    const auto body = body_of(r);
    EXPECT_EQ(body["status"], "Succeeded");
    EXPECT_EQ(body["version"], 0);
    ASSERT_FALSE(body["model"].is_null());
    const auto model = powl::from_json(body["model"].dump());
    EXPECT_TRUE(powl::validate(model).empty());
    EXPECT_TRUE(conversion::check_soundness(conversion::to_petri_net(model)).sound);
    // the fixture's first two answers are repaired before the third is accepted
    EXPECT_EQ(body["turn"]["provider_calls"], 3);
    EXPECT_FALSE(body["diagnostics"].empty());
}

TEST(Service, EmptyOrMalformedDescriptionIs400) {
    auto server = replay_server("online_shop");
    for (const std::string raw : {"", "{}", "[]", "not json", R"({"description": ""})", R"({"description": "  \n"})",
                                  R"({"description": 5})"}) {
        const auto r = server.client->Post("/conversations", raw, "application/json");
        ASSERT_TRUE(r);
        EXPECT_EQ(r->status, 400) << raw;
        EXPECT_TRUE(body_of(r).contains("error"));
    }
    EXPECT_TRUE(server.service->store().ids().empty());
}

TEST(Service, AlwaysCriticalIs422AfterFiveRepairRounds) {
    auto server = replay_server("always_critical");
    const auto r = server.post("/conversations", {{"description", scenario_text("always_critical", "description.txt")}});
    ASSERT_TRUE(r);
    ASSERT_EQ(r->status, 422) << r->body;
    const auto body = body_of(r);
    EXPECT_EQ(body["status"], "Failed");
    EXPECT_TRUE(body["model"].is_null());
    EXPECT_EQ(body["turn"]["critical_rounds"], 5);
    std::size_t critical = 0;
    for (const auto& d : body["diagnostics"]) {
        EXPECT_EQ(d["kind"], "ForbiddenImport");
        critical += d["category"] == "Critical";
    }
    // one per answer: the first attempt plus five repair rounds
    EXPECT_EQ(critical, 6u);
    EXPECT_EQ(body["turn"]["provider_calls"], 6);

    // the failed conversation is kept and refuses feedback
    const auto id = body["id"].get<std::string>();
    EXPECT_EQ(server.client->Get("/conversations/" + id)->status, 200);
    const auto f = server.post("/conversations/" + id + "/feedback", {{"feedback", "try again"}});
    EXPECT_EQ(f->status, 409);
    EXPECT_EQ(server.client->Get("/conversations/" + id + "/model")->status, 404);
}

TEST(Service, ProviderFailureIs502) {
    service::Service svc(replay_config("online_shop"), [](std::size_t) {
        return std::make_shared<orchestrator::ScriptedProvider>(std::vector<std::string>{});
    });
    const int port = svc.start();
    httplib::Client client("127.0.0.1", port);
    const auto r = client.Post("/conversations", json{{"description", "a process"}}.dump(), "application/json");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 502);
    const auto body = json::parse(r->body);
    EXPECT_EQ(body["diagnostics"].back()["stage"], "Provider");
    EXPECT_EQ(body["diagnostics"].back()["kind"], "ProviderFailure");
}

TEST(Service, MissingReplayDirectoryIs502) {
    auto config = replay_config("online_shop");
    config.replay_dir = "/nonexistent/replay";
    auto server = Running(std::make_unique<service::Service>(config));
    const auto r = server.post("/conversations", {{"description", "a process"}});
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 502);
}

TEST(Service, HotelFeedbackAddsPrepareFood) {
    auto server = replay_server("hotel");
    const auto r = server.post("/conversations", {{"description", scenario_text("hotel", "description.txt")}});
    ASSERT_EQ(r->status, 200) << r->body;
    const auto id = body_of(r)["id"].get<std::string>();
    EXPECT_FALSE(has_label(powl::from_json(body_of(r)["model"].dump()), "prepare food"));

    const auto f = server.post("/conversations/" + id + "/feedback", {{"feedback", scenario_text("hotel", "feedback-1.txt")}});
    ASSERT_EQ(f->status, 200) << f->body;
    const auto body = body_of(f);
    EXPECT_EQ(body["version"], 1);
    EXPECT_EQ(body["turn"]["kind"], "feedback");
    EXPECT_TRUE(has_label(powl::from_json(body["model"].dump()), "prepare food"));
    // the shared submodel in the repeated answers was repaired without another call
    bool auto_resolved = false;
    for (const auto& d : body["diagnostics"]) {
        auto_resolved = auto_resolved || d["auto_resolved"].get<bool>();
    }
    EXPECT_TRUE(auto_resolved);
}

TEST(Service, FeedbackErrors) {
    auto server = replay_server("online_shop");
    EXPECT_EQ(server.post("/conversations/nope/feedback", {{"feedback", "x"}})->status, 404);
    const auto r = server.post("/conversations", {{"description", scenario_text("online_shop", "description.txt")}});
    const auto id = body_of(r)["id"].get<std::string>();
    EXPECT_EQ(server.post("/conversations/" + id + "/feedback", {{"feedback", ""}})->status, 400);
    EXPECT_EQ(server.post("/conversations/" + id + "/feedback", {{"feedback", " \t"}})->status, 400);
    EXPECT_EQ(server.post("/conversations/" + id + "/feedback", {{"other", "x"}})->status, 400);
    EXPECT_EQ(server.client->Post("/conversations/" + id + "/feedback", "oops", "application/json")->status, 400);
    // none of the rejected requests reached the provider
    const auto view = body_of(server.client->Get("/conversations/" + id));
    EXPECT_EQ(view["versions"].size(), 1u);
    EXPECT_EQ(view["turns"].size(), 1u);
}

TEST(Service, FailedFeedbackKeepsPreviousVersion) {
    // one good answer, then garbage until the critical budget is spent
    service::Service svc(replay_config("online_shop"), [](std::size_t) {
        return std::make_shared<orchestrator::ScriptedProvider>(
            [](const prompting::History&, std::size_t call) -> std::string {
                return call == 0 ? support::bicycle_program() : "import os\n";
            });
    });
    const int port = svc.start();
    httplib::Client client("127.0.0.1", port);
    const auto r = client.Post("/conversations", json{{"description", "bicycles"}}.dump(), "application/json");
    ASSERT_EQ(r->status, 200);
    const auto id = json::parse(r->body)["id"].get<std::string>();
    const auto f = client.Post("/conversations/" + id + "/feedback", json{{"feedback", "more"}}.dump(), "application/json");
    EXPECT_EQ(f->status, 422);
    const auto body = json::parse(f->body);
    EXPECT_EQ(body["status"], "Succeeded");
    EXPECT_EQ(body["turn"]["status"], "Failed");
    EXPECT_EQ(body["version"], 0);
    EXPECT_TRUE(powl::structurally_equal(powl::from_json(body["model"].dump()), support::bicycle_model()));
    // still open for feedback
    EXPECT_EQ(client.Post("/conversations/" + id + "/feedback", json{{"feedback", "again"}}.dump(), "application/json")->status,
              422);
}

TEST(Service, ModelExports) {
    auto server = replay_server("online_shop");
    const auto r = server.post("/conversations", {{"description", scenario_text("online_shop", "description.txt")}});
    const auto id = body_of(r)["id"].get<std::string>();
    const auto model = powl::from_json(body_of(r)["model"].dump());
    const auto base = "/conversations/" + id + "/model";

    const auto bpmn = server.client->Get(base + "?format=bpmn");
    ASSERT_EQ(bpmn->status, 200);
    EXPECT_EQ(bpmn->get_header_value("Content-Type"), "application/xml");
    EXPECT_EQ(bpmn->body, conversion::export_bpmn_xml(conversion::to_bpmn(model)));
    EXPECT_TRUE(conversion::bpmn_problems(conversion::to_bpmn(model)).empty());

    const auto pnml = server.client->Get(base + "?format=pnml");
    ASSERT_EQ(pnml->status, 200);
    EXPECT_EQ(pnml->get_header_value("Content-Type"), "application/xml");
    EXPECT_NE(pnml->body.find("<pnml"), std::string::npos);
    EXPECT_EQ(pnml->body, conversion::export_pnml(conversion::to_petri_net(model)));

    const auto plain = server.client->Get(base);
    ASSERT_EQ(plain->status, 200);
    EXPECT_EQ(plain->get_header_value("Content-Type"), "application/json");
    EXPECT_EQ(plain->body, powl::to_json(model));
    EXPECT_EQ(server.client->Get(base + "?format=powl-json&version=0")->body, plain->body);

    EXPECT_EQ(server.client->Get(base + "?format=dot")->status, 400);
    EXPECT_EQ(server.client->Get(base + "?version=1")->status, 404);
    EXPECT_EQ(server.client->Get(base + "?version=-1")->status, 400);
    EXPECT_EQ(server.client->Get(base + "?version=x")->status, 400);
    EXPECT_EQ(server.client->Get("/conversations/nope/model")->status, 404);
}

TEST(Service, ConversationViewAfterThreeTurns) {
    auto server = replay_server("online_shop");
    const auto r = server.post("/conversations", {{"description", scenario_text("online_shop", "description.txt")}});
    const auto id = body_of(r)["id"].get<std::string>();
    const auto fresh = body_of(server.client->Get("/conversations/" + id));
    EXPECT_GE(fresh["history"].size(), 2u);
    EXPECT_EQ(fresh["history"].back()["role"], "assistant");

    for (const auto* file : {"feedback-1.txt", "feedback-2.txt"}) {
        const auto f = server.post("/conversations/" + id + "/feedback", {{"feedback", scenario_text("online_shop", file)}});
        ASSERT_EQ(f->status, 200) << f->body;
    }
    const auto view = body_of(server.client->Get("/conversations/" + id));
    EXPECT_EQ(view["status"], "Succeeded");
    ASSERT_EQ(view["versions"].size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(view["versions"][i]["index"], i);
        EXPECT_GT(view["versions"][i]["activities"].get<int>(), 0);
    }
    EXPECT_EQ(view["turns"].size(), 3u);
    // version 2 made the reward selection skippable
    const auto v2 = powl::from_json(server.client->Get("/conversations/" + id + "/model?version=2")->body);
    const auto v1 = powl::from_json(server.client->Get("/conversations/" + id + "/model?version=1")->body);
    EXPECT_EQ(powl::count_activities(v2), powl::count_activities(v1));
    EXPECT_FALSE(powl::structurally_equal(v1, v2));

    EXPECT_EQ(server.client->Get("/conversations/unknown")->status, 404);
    const auto list = body_of(server.client->Get("/conversations"));
    EXPECT_EQ(list["conversations"].size(), 1u);
}

TEST(Service, ReplayIsDeterministic) {
    std::vector<std::string> models;
    for (int run = 0; run < 2; ++run) {
        auto server = replay_server("hotel");
        const auto r = server.post("/conversations", {{"description", scenario_text("hotel", "description.txt")}});
        const auto id = body_of(r)["id"].get<std::string>();
        std::string all = body_of(r)["model"].dump();
        for (const auto* file : {"feedback-1.txt", "feedback-2.txt"}) {
            all += body_of(server.post("/conversations/" + id + "/feedback", {{"feedback", scenario_text("hotel", file)}}))
                       ["model"]
                           .dump();
        }
        all += server.client->Get("/conversations/" + id + "/model?format=bpmn")->body;
        models.push_back(all);
    }
    EXPECT_EQ(models[0], models[1]);
}

TEST(Service, PersistedStoreSurvivesRestart) {
    const auto dir = temp_dir();
    const auto store = (dir / "store.jsonl").string();
    std::string id;
    std::string before;
    {
        auto server = replay_server("online_shop", store);
        id = body_of(server.post("/conversations", {{"description", scenario_text("online_shop", "description.txt")}}))["id"];
        ASSERT_EQ(server.post("/conversations/" + id + "/feedback",
                              {{"feedback", scenario_text("online_shop", "feedback-1.txt")}})
                      ->status,
                  200);
        before = server.client->Get("/conversations/" + id)->body;
    }
    {
        auto server = replay_server("online_shop", store);
        const auto after = server.client->Get("/conversations/" + id);
        ASSERT_EQ(after->status, 200);
        EXPECT_EQ(after->body, before);
        // the replay provider resumes after the answers already recorded
        const auto f = server.post("/conversations/" + id + "/feedback",
                                   {{"feedback", scenario_text("online_shop", "feedback-2.txt")}});
        ASSERT_EQ(f->status, 200) << f->body;
        EXPECT_EQ(body_of(f)["version"], 2);
    }
    {
        service::ConversationStore reloaded(store);
        ASSERT_TRUE(reloaded.contains(id));
        EXPECT_EQ(reloaded.find(id)->snapshot().versions.size(), 3u);
    }
}

TEST(ConversationStore, LastRecordWinsAndTornLinesAreSkipped) {
    const auto dir = temp_dir();
    const auto path = dir / "s.jsonl";
    const auto run = support::run_scenario("online_shop");
    {
        service::ConversationStore store(path);
        auto first = run.conversation;
        first.versions.erase(first.versions.begin() + 1, first.versions.end());
        first.turns.erase(first.turns.begin() + 1, first.turns.end());
        auto entry = store.insert(first);
        store.save(run.conversation);
        EXPECT_THROW(store.insert(first), Error);
    }
    {
        std::ofstream out(path, std::ios::app);
        out << "{\"id\": \"torn";
    }
    service::ConversationStore store(path);
    ASSERT_EQ(store.ids().size(), 1u);
    EXPECT_EQ(orchestrator::to_json(store.find("online_shop")->snapshot()), orchestrator::to_json(run.conversation));
}

TEST(Service, ConcurrentConversationsStaySeparate) {
    std::atomic<int> in_flight{0};
    std::atomic<int> peak{0};
    service::Service svc(replay_config("online_shop"), [&](std::size_t) {
        return std::make_shared<orchestrator::ScriptedProvider>(
            [&](const prompting::History& history, std::size_t) -> std::string {
                const int now = ++in_flight;
                int expected = peak.load();
                while (now > expected && !peak.compare_exchange_weak(expected, now)) {
                }
                std::this_thread::sleep_for(std::chrono::milliseconds(150));
                --in_flight;
                // echo the request into a comment so each history is traceable
                const auto& last = history.back().content;
                const auto tag = last.substr(last.rfind("conversation-"), std::string("conversation-0").size());
                return "# " + tag + "\n" + support::bicycle_program();
            });
    });
    const int port = svc.start();
    constexpr int n = 6;
    std::vector<std::future<json>> posts;
    for (int i = 0; i < n; ++i) {
        posts.push_back(std::async(std::launch::async, [port, i] {
            httplib::Client client("127.0.0.1", port);
            client.set_read_timeout(30, 0);
            const auto r = client.Post("/conversations",
                                       json{{"description", "process for conversation-" + std::to_string(i)}}.dump(),
                                       "application/json");
            return json::parse(r->body);
        }));
    }
    // unrelated requests are served while the provider calls are running
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    httplib::Client probe("127.0.0.1", port);
    const auto started = std::chrono::steady_clock::now();
    EXPECT_EQ(probe.Get("/health")->status, 200);
    EXPECT_LT(std::chrono::steady_clock::now() - started, std::chrono::milliseconds(140));

    for (int i = 0; i < n; ++i) {
        const auto body = posts[i].get();
        ASSERT_EQ(body["status"], "Succeeded");
        const auto view = json::parse(probe.Get("/conversations/" + body["id"].get<std::string>())->body);
        const auto tag = "conversation-" + std::to_string(i);
        for (const auto& m : view["history"]) {
            const auto content = m["content"].get<std::string>();
            for (int j = 0; j < n; ++j) {
                if (j != i) {
                    EXPECT_EQ(content.find("conversation-" + std::to_string(j)), std::string::npos);
                }
            }
        }
        EXPECT_NE(view["history"].back()["content"].get<std::string>().find(tag), std::string::npos);
    }
    EXPECT_GT(peak.load(), 1);
}

TEST(Service, FeedbackOnOneConversationIsSerialized) {
    std::atomic<int> in_flight{0};
    std::atomic<bool> overlapped{false};
    service::Service svc(replay_config("online_shop"), [&](std::size_t) {
        return std::make_shared<orchestrator::ScriptedProvider>(
            [&](const prompting::History&, std::size_t) -> std::string {
                if (++in_flight > 1) {
                    overlapped = true;
                }
                std::this_thread::sleep_for(std::chrono::milliseconds(50));
                --in_flight;
                return support::bicycle_program();
            });
    });
    const int port = svc.start();
    httplib::Client client("127.0.0.1", port);
    const auto id = json::parse(client.Post("/conversations", json{{"description", "bikes"}}.dump(), "application/json")->body)
                        ["id"]
                            .get<std::string>();
    std::vector<std::future<int>> posts;
    for (int i = 0; i < 4; ++i) {
        posts.push_back(std::async(std::launch::async, [port, id, i] {
            httplib::Client c("127.0.0.1", port);
            c.set_read_timeout(30, 0);
            return c.Post("/conversations/" + id + "/feedback", json{{"feedback", "change " + std::to_string(i)}}.dump(),
                          "application/json")
                ->status;
        }));
    }
    for (auto& p : posts) {
        EXPECT_EQ(p.get(), 200);
    }
    EXPECT_FALSE(overlapped.load());
    const auto view = json::parse(client.Get("/conversations/" + id)->body);
    EXPECT_EQ(view["versions"].size(), 5u);
    // strictly alternating feedback and answer after the initial exchange
    const auto& history = view["history"];
    for (std::size_t i = history.size() - 8; i < history.size(); i += 2) {
        EXPECT_EQ(history[i]["role"], "user");
        EXPECT_EQ(history[i + 1]["role"], "assistant");
    }
}

TEST(Service, CorsPreflight) {
    auto server = replay_server("online_shop");
    const auto r = server.client->Options("/conversations");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 204);
    EXPECT_EQ(r->get_header_value("Access-Control-Allow-Origin"), "*");
}
