// promodel: generate, refine, convert and check POWL process models.
//
// Exit codes: 0 ok, 2 usage or unreadable input, 3 generation failed,
// 4 validation or soundness failure. Diagnostics go to stderr as JSON lines.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "promodel/conversion/formats.hpp"
#include "promodel/conversion/soundness.hpp"
#include "promodel/dsl/interpret.hpp"
#include "promodel/orchestrator/orchestrator.hpp"
#include "promodel/powl/json.hpp"
#include "promodel/powl/validate.hpp"
#include "promodel/prompting/template.hpp"
#include "promodel/semantics/language.hpp"
#include "promodel/service/config.hpp"
#include "promodel/service/server.hpp"

namespace {

using namespace promodel;
using nlohmann::json;

constexpr int exit_ok = 0;
constexpr int exit_usage = 2;
constexpr int exit_generation = 3;
constexpr int exit_check = 4;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void report(std::string_view kind, const std::string& message) {
    std::cerr << json{{"kind", kind}, {"message", message}}.dump() << "\n";
}

std::string read_input(const std::string& path) {
    if (path == "-") {
        return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw UsageError("cannot read " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// Writes via a temporary file so a crash never leaves half a document.
void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') {
            std::cout << "\n";
        }
        return;
    }
    const auto tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) {
            throw UsageError("cannot write " + path);
        }
        out << text;
    }
    std::filesystem::rename(tmp, path);
}

powl::PowlModel load_model(const std::string& path) {
    try {
        return powl::from_json(read_input(path));
    } catch (const Error& e) {
        throw UsageError(path + ": " + e.what());
    }
}

conversion::Format format_of(const std::string& name) {
    const auto f = conversion::parse_format(name);
    if (!f) {
        throw UsageError("unknown format '" + name + "'; expected powl-json, pnml or bpmn");
    }
    return *f;
}

std::string extension(conversion::Format f) {
    switch (f) {
    case conversion::Format::PowlJson: return ".powl.json";
    case conversion::Format::Pnml: return ".pnml";
    case conversion::Format::Bpmn: return ".bpmn";
    }
    return "";
}

struct ProviderFlags {
    std::string config_file;
    std::string provider;
    std::string replay_dir;
    std::string endpoint;
    std::string model;
    std::string templates;
    std::optional<std::size_t> max_critical;
    std::optional<std::size_t> max_adjustable;

    void add_to(CLI::App& app) {
        app.add_option("--config", config_file, "JSON configuration file (same keys as the service)");
        app.add_option("--provider", provider, "http or replay")->check(CLI::IsMember({"http", "replay"}));
        app.add_option("--replay", replay_dir, "directory of recorded responses (implies --provider replay)");
        app.add_option("--endpoint", endpoint, "chat-completions URL");
        app.add_option("--model", model, "model name sent to the provider");
        app.add_option("--templates", templates, "prompt template directory");
        app.add_option("--max-critical", max_critical, "repair rounds for critical errors");
        app.add_option("--max-adjustable", max_adjustable, "repair rounds before automatic resolution");
    }

    service::ServiceConfig resolve() const {
        service::ServiceConfig config;
        config.templates_dir = PROMODEL_TEMPLATE_DIR;
        if (!config_file.empty()) {
            service::apply_file(config, config_file);
        }
        service::apply_environment(config);
        if (!replay_dir.empty()) {
            config.provider_kind = "replay";
            config.replay_dir = replay_dir;
        }
        if (!provider.empty()) config.provider_kind = provider;
        if (!endpoint.empty()) config.provider_endpoint = endpoint;
        if (!model.empty()) config.provider_model = model;
        if (!templates.empty()) config.templates_dir = templates;
        if (max_critical) config.max_critical = *max_critical;
        if (max_adjustable) config.max_adjustable = *max_adjustable;
        service::check(config);
        return config;
    }
};

void print_diagnostics(const orchestrator::Turn& turn) {
    for (const auto& d : turn.diagnostics) {
        std::cerr << orchestrator::to_json(d).dump() << "\n";
    }
}

json summary(const orchestrator::Conversation& c) {
    json j{{"id", c.id}, {"status", to_string(c.status)}, {"versions", c.versions.size()}};
    if (const auto* v = c.current()) {
        j["version"] = c.versions.size() - 1;
        j["activities"] = powl::activity_labels(v->model);
    }
    return j;
}

struct GenerateArgs {
    ProviderFlags provider;
    std::string description_file;
    std::string text;
    std::string out;
    std::string format = "powl-json";
    std::string conversation_out;
};

int run_generate(const GenerateArgs& a) {
    if (a.description_file.empty() == a.text.empty()) {
        throw UsageError("give exactly one of --description <file|-> or a description text");
    }
    const auto format = format_of(a.format);
    const auto description = a.text.empty() ? read_input(a.description_file) : a.text;
    const auto config = a.provider.resolve();
    const auto templ = prompting::load_template(config.templates_dir);
    auto provider = service::make_provider(config);
    const auto conversation = orchestrator::generate(description, *provider, config.loop_config(), templ);
    print_diagnostics(conversation.turns.back());
    if (!a.conversation_out.empty()) {
        write_output(a.conversation_out, orchestrator::to_json(conversation).dump(2));
    }
    if (conversation.status != orchestrator::Status::Succeeded) {
        report("GenerationFailed", "no model after " + std::to_string(conversation.turns.back().provider_calls) +
                                       " provider calls");
        return exit_generation;
    }
    write_output(a.out, conversion::render(conversation.current()->model, format));
    return exit_ok;
}

struct ChatArgs {
    ProviderFlags provider;
    std::string description_file;
    std::string session;
    std::string save_dir;
    std::string format = "powl-json";
};

void save_session(const ChatArgs& a, const orchestrator::Conversation& c, conversion::Format format) {
    if (!a.session.empty()) {
        write_output(a.session, orchestrator::to_json(c).dump(2));
    }
    if (!a.save_dir.empty()) {
        std::filesystem::create_directories(a.save_dir);
        for (std::size_t i = 0; i < c.versions.size(); ++i) {
            const auto path = std::filesystem::path(a.save_dir) / ("version-" + std::to_string(i) + extension(format));
            write_output(path.string(), conversion::render(c.versions[i].model, format));
        }
    }
}

int run_chat(const ChatArgs& a) {
    const auto format = format_of(a.format);
    const auto config = a.provider.resolve();
    const auto templ = prompting::load_template(config.templates_dir);

    orchestrator::Conversation conversation;
    const bool resume = !a.session.empty() && std::filesystem::exists(a.session);
    if (resume) {
        try {
            conversation = orchestrator::conversation_from_json(json::parse(read_input(a.session)));
        } catch (const std::exception& e) {
            throw UsageError("session " + a.session + " is unreadable: " + e.what());
        }
    } else if (a.description_file.empty() || a.description_file == "-") {
        throw UsageError("chat needs --description <file> (stdin carries the feedback)");
    }
    std::size_t answered = 0;
    for (const auto& m : conversation.history) {
        answered += m.author == prompting::Author::Assistant;
    }
    auto provider = service::make_provider(config, answered);

    if (!resume) {
        conversation = orchestrator::generate(read_input(a.description_file), *provider, config.loop_config(), templ);
        print_diagnostics(conversation.turns.back());
        save_session(a, conversation, format);
    }
    std::cout << summary(conversation).dump() << std::endl;
    if (conversation.status != orchestrator::Status::Succeeded) {
        report("GenerationFailed", "the initial generation did not produce a model");
        return exit_generation;
    }

    std::string line;
    while (std::getline(std::cin, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            break;
        }
        const auto& turn = orchestrator::refine(conversation, line, *provider, config.loop_config());
        print_diagnostics(turn);
        if (turn.status != orchestrator::Status::Succeeded) {
            report("FeedbackFailed", "keeping version " + std::to_string(conversation.versions.size() - 1));
        }
        save_session(a, conversation, format);
        std::cout << summary(conversation).dump() << std::endl;
    }
    return exit_ok;
}

int run_convert(const std::string& in, const std::string& format, const std::string& out) {
    const auto f = format_of(format);
    const auto model = load_model(in);
    if (const auto violations = powl::validate(model); !violations.empty()) {
        for (const auto& v : violations) {
            report(powl::to_string(v.kind), powl::format_location(v.location) + ": " + v.message);
        }
        return exit_check;
    }
    write_output(out, conversion::render(model, f));
    return exit_ok;
}

int run_validate(const std::string& in) {
    const auto model = load_model(in);
    const auto violations = powl::validate(model);
    for (const auto& v : violations) {
        std::cout << json{{"kind", powl::to_string(v.kind)},
                          {"location", powl::format_location(v.location)},
                          {"message", v.message}}
                         .dump()
                  << "\n";
    }
    if (violations.empty()) {
        std::cout << json{{"valid", true}, {"activities", powl::count_activities(model)}}.dump() << "\n";
    }
    return violations.empty() ? exit_ok : exit_check;
}

int run_soundness(const std::string& in, std::size_t state_cap, bool no_reduce) {
    const auto model = load_model(in);
    if (const auto violations = powl::validate(model); !violations.empty()) {
        for (const auto& v : violations) {
            report(powl::to_string(v.kind), powl::format_location(v.location) + ": " + v.message);
        }
        return exit_check;
    }
    const auto net = conversion::to_petri_net(model);
    const auto result = conversion::check_soundness(net, {state_cap, !no_reduce});
    auto violations = json::array();
    for (const auto& v : result.violations) {
        violations.push_back({{"kind", conversion::to_string(v.kind)}, {"detail", v.detail}});
    }
    std::cout << json{{"sound", result.sound},
                      {"explored_states", result.explored_states},
                      {"places", net.places().size()},
                      {"transitions", net.transitions().size()},
                      {"violations", violations}}
                     .dump()
              << "\n";
    return result.sound ? exit_ok : exit_check;
}

int run_language(const std::string& in, std::size_t max_loop, std::size_t max_len) {
    const auto model = load_model(in);
    semantics::TraceSet traces;
    try {
        traces = semantics::bounded_language(model, max_loop, max_len);
    } catch (const Error& e) {
        report(to_string(e.code()), e.what());
        return exit_check;
    }
    for (const auto& trace : traces) {
        std::cout << json(trace).dump() << "\n";
    }
    return exit_ok;
}

int run_interpret(const std::string& in, const std::string& format, const std::string& out) {
    const auto f = format_of(format);
    const auto source = read_input(in);
    auto analysis = dsl::analyze(source);
    for (const auto& v : analysis.violations) {
        std::cerr << json{{"kind", dsl::to_string(v.kind)}, {"line", v.line}, {"message", v.message}}.dump() << "\n";
    }
    if (!analysis.ok()) {
        return exit_check;
    }
    try {
        const auto model = dsl::interpret(*analysis.program);
        write_output(out, conversion::render(model, f));
    } catch (const dsl::InterpretationFailure& e) {
        std::cerr << json{{"kind", e.cause()}, {"line", e.line()}, {"message", e.detail()}}.dump() << "\n";
        return exit_check;
    }
    return exit_ok;
}

int run_serve(const ProviderFlags& flags, const std::string& listen, const std::string& store) {
    auto config = flags.resolve();
    if (!listen.empty()) config.listen_address = listen;
    if (!store.empty()) config.store_path = store;
    service::parse_address(config.listen_address);
    service::Service svc(config);
    std::cerr << json{{"kind", "Listening"}, {"message", config.listen_address}}.dump() << std::endl;
    if (!svc.listen()) {
        report("ConfigError", "cannot listen on " + config.listen_address);
        return exit_usage;
    }
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generate, refine, convert and check POWL process models"};
    app.require_subcommand(1);

    GenerateArgs generate;
    auto* gen = app.add_subcommand("generate", "generate a model from a process description");
    generate.provider.add_to(*gen);
    gen->add_option("--description", generate.description_file, "description file, or - for stdin");
    gen->add_option("text", generate.text, "description text");
    gen->add_option("--out", generate.out, "output file (default stdout)");
    gen->add_option("--format", generate.format, "powl-json, pnml or bpmn");
    gen->add_option("--conversation", generate.conversation_out, "also write the full conversation JSON here");

    ChatArgs chat;
    auto* chat_cmd = app.add_subcommand("chat", "generate, then refine with one feedback line per turn");
    chat.provider.add_to(*chat_cmd);
    chat_cmd->add_option("--description", chat.description_file, "description file");
    chat_cmd->add_option("--session", chat.session, "session file; resumed when it exists");
    chat_cmd->add_option("--save", chat.save_dir, "directory receiving every version");
    chat_cmd->add_option("--format", chat.format, "format of saved versions");

    std::string in;
    std::string out;
    std::string format = "bpmn";
    auto* convert = app.add_subcommand("convert", "export a POWL JSON model as PNML or BPMN");
    convert->add_option("--in", in, "POWL JSON model, or -")->required();
    convert->add_option("--format", format, "powl-json, pnml or bpmn");
    convert->add_option("--out", out, "output file (default stdout)");

    auto* validate = app.add_subcommand("validate", "check structural invariants");
    validate->add_option("--in", in, "POWL JSON model, or -")->required();

    std::size_t state_cap = 1000000;
    bool no_reduce = false;
    auto* soundness = app.add_subcommand("soundness", "check the converted workflow net for soundness");
    soundness->add_option("--in", in, "POWL JSON model, or -")->required();
    soundness->add_option("--state-cap", state_cap, "maximum explored markings");
    soundness->add_flag("--no-reduce", no_reduce, "explore the unreduced net");

    std::size_t max_loop = 1;
    std::size_t max_len = 10;
    auto* language = app.add_subcommand("language", "print the bounded trace language, one JSON array per line");
    language->add_option("--in", in, "POWL JSON model, or -")->required();
    language->add_option("--max-loop", max_loop, "redo iterations per loop");
    language->add_option("--max-len", max_len, "maximum trace length");

    std::string interpret_format = "powl-json";
    auto* interpret = app.add_subcommand("interpret", "audit and run a model-generation program");
    interpret->add_option("--in", in, "program file, or -")->required();
    interpret->add_option("--format", interpret_format, "powl-json, pnml or bpmn");
    interpret->add_option("--out", out, "output file (default stdout)");

    ProviderFlags serve_flags;
    std::string listen;
    std::string store;
    auto* serve = app.add_subcommand("serve", "run the REST service");
    serve_flags.add_to(*serve);
    serve->add_option("--listen", listen, "host:port");
    serve->add_option("--store", store, "append-only conversation store");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    try {
        if (*gen) return run_generate(generate);
        if (*chat_cmd) return run_chat(chat);
        if (*convert) return run_convert(in, format, out);
        if (*validate) return run_validate(in);
        if (*soundness) return run_soundness(in, state_cap, no_reduce);
        if (*language) return run_language(in, max_loop, max_len);
        if (*interpret) return run_interpret(in, interpret_format, out);
        if (*serve) return run_serve(serve_flags, listen, store);
    } catch (const UsageError& e) {
        report("UsageError", e.what());
        return exit_usage;
    } catch (const Error& e) {
        report(to_string(e.code()), e.what());
        const bool usage = e.code() == ErrorCode::ConfigError || e.code() == ErrorCode::TemplateError ||
                           e.code() == ErrorCode::EmptyDescription || e.code() == ErrorCode::SchemaError;
        return usage ? exit_usage : exit_check;
    } catch (const std::exception& e) {
        report("InternalError", e.what());
        return exit_check;
    }
    return exit_usage;
}
