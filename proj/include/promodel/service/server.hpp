#pragma once

#include <algorithm>
#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <utility>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "promodel/conversion/formats.hpp"
#include "promodel/error.hpp"
#include "promodel/orchestrator/orchestrator.hpp"
#include "promodel/prompting/template.hpp"
#include "promodel/service/config.hpp"
#include "promodel/service/store.hpp"

namespace promodel::service {

// Creates the provider for one conversation; `answered` is the number of
// assistant messages the conversation already holds.
using ProviderFactory = std::function<std::shared_ptr<orchestrator::LlmProvider>(std::size_t answered)>;

struct Address {
    std::string host;
    int port = 0;
};

inline Address parse_address(const std::string& text) {
    const auto colon = text.rfind(':');
    if (colon == std::string::npos || colon == 0) {
        throw Error(ErrorCode::ConfigError, "listen address must look like host:port, got '" + text + "'");
    }
    Address a{text.substr(0, colon), 0};
    try {
        std::size_t used = 0;
        a.port = std::stoi(text.substr(colon + 1), &used);
        if (used != text.size() - colon - 1 || a.port < 0 || a.port > 65535) {
            throw std::out_of_range(text);
        }
    } catch (const std::exception&) {
        throw Error(ErrorCode::ConfigError, "bad port in listen address '" + text + "'");
    }
    return a;
}

namespace detail {

inline nlohmann::json error_body(std::string_view code, const std::string& message) {
    return {{"error", {{"code", code}, {"message", message}}}};
}

inline void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

inline std::size_t answered(const orchestrator::Conversation& c) {
    return static_cast<std::size_t>(std::count_if(c.history.begin(), c.history.end(), [](const auto& m) {
        return m.author == prompting::Author::Assistant;
    }));
}

// Summary of one turn plus the conversation's current model.
inline nlohmann::json turn_view(const orchestrator::Conversation& c, const orchestrator::Turn& t) {
    auto diagnostics = nlohmann::json::array();
    for (const auto& d : t.diagnostics) {
        diagnostics.push_back(orchestrator::to_json(d));
    }
    nlohmann::json j{{"id", c.id},
                     {"status", to_string(c.status)},
                     {"turn",
                      {{"kind", t.kind == orchestrator::TurnKind::Generate ? "generate" : "feedback"},
                       {"status", to_string(t.status)},
                       {"provider_calls", t.provider_calls},
                       {"critical_rounds", t.critical_rounds},
                       {"adjustable_rounds", t.adjustable_rounds}}},
                     {"diagnostics", diagnostics}};
    if (c.versions.empty()) {
        j["version"] = nullptr;
        j["model"] = nullptr;
    } else {
        j["version"] = c.versions.size() - 1;
        j["model"] = nlohmann::json::parse(powl::to_json(c.versions.back().model));
    }
    return j;
}

inline int turn_status_code(const orchestrator::Turn& t) {
    if (t.status == orchestrator::Status::Succeeded) {
        return 200;
    }
    const bool provider = !t.diagnostics.empty() && t.diagnostics.back().stage == orchestrator::Stage::Provider;
    return provider ? 502 : 422;
}

inline nlohmann::json conversation_view(const orchestrator::Conversation& c) {
    auto versions = nlohmann::json::array();
    for (std::size_t i = 0; i < c.versions.size(); ++i) {
        const auto& v = c.versions[i];
        versions.push_back({{"index", i},
                            {"created_at", orchestrator::detail::millis(v.created_at)},
                            {"activities", powl::count_activities(v.model)},
                            {"diagnostics", v.diagnostics.size()}});
    }
    auto turns = nlohmann::json::array();
    for (const auto& t : c.turns) {
        turns.push_back(orchestrator::to_json(t));
    }
    return {{"id", c.id},
            {"description", c.description},
            {"status", to_string(c.status)},
            {"history", prompting::to_json(c.history)},
            {"versions", versions},
            {"turns", turns}};
}

// Reads a required non-blank string field; sets a 400 response otherwise.
inline std::optional<std::string> text_field(const httplib::Request& req, httplib::Response& res, const char* field,
                                             ErrorCode empty_code) {
    const auto body = nlohmann::json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) {
        send_json(res, 400, error_body("SchemaError", "request body must be a JSON object"));
        return std::nullopt;
    }
    if (!body.contains(field) || !body[field].is_string()) {
        send_json(res, 400, error_body(to_string(empty_code), std::string("field '") + field + "' is required"));
        return std::nullopt;
    }
    auto text = body[field].get<std::string>();
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
        send_json(res, 400, error_body(to_string(empty_code), std::string("field '") + field + "' is empty"));
        return std::nullopt;
    }
    return text;
}

} // namespace detail

class Service {
public:
    Service(ServiceConfig config, ProviderFactory factory)
        : config_(std::move(config)), factory_(std::move(factory)), templates_(config_.templates_dir),
          store_(config_.store_path) {
        routes();
    }

    explicit Service(ServiceConfig config)
        : Service(config, [config](std::size_t answered) {
              return std::shared_ptr<orchestrator::LlmProvider>(make_provider(config, answered));
          }) {}

    ~Service() { stop(); }

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    httplib::Server& http() { return server_; }
    ConversationStore& store() { return store_; }
    const ServiceConfig& config() const { return config_; }

    // Blocks until stop().
    bool listen() {
        const auto a = parse_address(config_.listen_address);
        return server_.listen(a.host, a.port);
    }

    // Binds an ephemeral port and serves on a background thread.
    int start(const std::string& host = "127.0.0.1") {
        const int port = server_.bind_to_any_port(host);
        if (port < 0) {
            throw Error(ErrorCode::ConfigError, "cannot bind " + host);
        }
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
        return port;
    }

    void stop() {
        server_.stop();
        if (thread_.joinable()) {
            thread_.join();
        }
    }

private:
    std::shared_ptr<orchestrator::LlmProvider> provider_for(const orchestrator::Conversation& c) {
        std::lock_guard lock(providers_mutex_);
        auto& slot = providers_[c.id];
        if (!slot) {
            slot = factory_(detail::answered(c));
        }
        return slot;
    }

    void routes() {
        server_.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
        server_.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
            res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
            res.status = 204;
        });
        server_.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
            try {
                std::rethrow_exception(ep);
            } catch (const Error& e) {
                const int status = e.code() == ErrorCode::ProviderFailure ? 502 : 500;
                detail::send_json(res, status, detail::error_body(to_string(e.code()), e.what()));
            } catch (const std::exception& e) {
                detail::send_json(res, 500, detail::error_body("InternalError", e.what()));
            }
        });

        server_.Get("/health", [](const httplib::Request&, httplib::Response& res) {
            detail::send_json(res, 200, {{"status", "ok"}});
        });

        server_.Get("/conversations", [this](const httplib::Request&, httplib::Response& res) {
            auto list = nlohmann::json::array();
            for (const auto& id : store_.ids()) {
                if (auto entry = store_.find(id)) {
                    const auto c = entry->snapshot();
                    list.push_back({{"id", c.id}, {"status", to_string(c.status)}, {"versions", c.versions.size()}});
                }
            }
            detail::send_json(res, 200, {{"conversations", list}});
        });

        server_.Post("/conversations", [this](const httplib::Request& req, httplib::Response& res) {
            const auto description = detail::text_field(req, res, "description", ErrorCode::EmptyDescription);
            if (!description) {
                return;
            }
            const auto templ = templates_.get();
            orchestrator::Conversation seed;
            seed.id = orchestrator::new_conversation_id();
            auto provider = provider_for(seed);
            auto conversation =
                orchestrator::generate(*description, *provider, config_.loop_config(), *templ, nullptr, seed.id);
            const auto status = detail::turn_status_code(conversation.turns.back());
            const auto body = detail::turn_view(conversation, conversation.turns.back());
            store_.insert(std::move(conversation));
            detail::send_json(res, status, body);
        });

        server_.Post(R"(/conversations/([^/]+)/feedback)", [this](const httplib::Request& req,
                                                                   httplib::Response& res) {
            const auto entry = store_.find(req.matches[1]);
            if (!entry) {
                detail::send_json(res, 404, detail::error_body("NotFound", "unknown conversation"));
                return;
            }
            const auto feedback = detail::text_field(req, res, "feedback", ErrorCode::EmptyFeedback);
            if (!feedback) {
                return;
            }
            std::lock_guard turn_lock(entry->turn);
            auto conversation = entry->snapshot();
            if (conversation.status != orchestrator::Status::Succeeded || conversation.versions.empty()) {
                detail::send_json(res, 409,
                                  detail::error_body("PreconditionFailed", "conversation is " +
                                                                               std::string(to_string(conversation.status)) +
                                                                               "; feedback needs a generated model"));
                return;
            }
            auto provider = provider_for(conversation);
            const auto& turn = orchestrator::refine(conversation, *feedback, *provider, config_.loop_config());
            const auto status = detail::turn_status_code(turn);
            const auto body = detail::turn_view(conversation, turn);
            store_.save(conversation);
            entry->replace(std::move(conversation));
            detail::send_json(res, status, body);
        });

        server_.Get(R"(/conversations/([^/]+)/model)", [this](const httplib::Request& req, httplib::Response& res) {
            const auto entry = store_.find(req.matches[1]);
            if (!entry) {
                detail::send_json(res, 404, detail::error_body("NotFound", "unknown conversation"));
                return;
            }
            const auto name = req.has_param("format") ? req.get_param_value("format") : std::string("powl-json");
            const auto format = conversion::parse_format(name);
            if (!format) {
                detail::send_json(res, 400,
                                  detail::error_body("BadRequest", "unknown format '" + name +
                                                                       "'; expected powl-json, pnml or bpmn"));
                return;
            }
            const auto conversation = entry->snapshot();
            if (conversation.versions.empty()) {
                detail::send_json(res, 404, detail::error_body("NotFound", "conversation has no model"));
                return;
            }
            std::size_t index = conversation.versions.size() - 1;
            if (req.has_param("version")) {
                const auto text = req.get_param_value("version");
                try {
                    std::size_t used = 0;
                    const long n = std::stol(text, &used);
                    if (used != text.size() || n < 0) {
                        throw std::invalid_argument(text);
                    }
                    index = static_cast<std::size_t>(n);
                } catch (const std::exception&) {
                    detail::send_json(res, 400, detail::error_body("BadRequest", "version must be an integer"));
                    return;
                }
                if (index >= conversation.versions.size()) {
                    detail::send_json(res, 404, detail::error_body("NotFound", "no version " + text));
                    return;
                }
            }
            res.status = 200;
            res.set_content(conversion::render(conversation.versions[index].model, *format),
                            std::string(conversion::content_type(*format)));
        });

        server_.Get(R"(/conversations/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            const auto entry = store_.find(req.matches[1]);
            if (!entry) {
                detail::send_json(res, 404, detail::error_body("NotFound", "unknown conversation"));
                return;
            }
            detail::send_json(res, 200, detail::conversation_view(entry->snapshot()));
        });
    }

    ServiceConfig config_;
    ProviderFactory factory_;
    prompting::TemplateStore templates_;
    ConversationStore store_;
    httplib::Server server_;
    std::thread thread_;
    std::mutex providers_mutex_;
    std::map<std::string, std::shared_ptr<orchestrator::LlmProvider>> providers_;
};

} // namespace promodel::service
