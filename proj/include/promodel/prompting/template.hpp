#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "promodel/error.hpp"

namespace promodel::prompting {

struct FewShotExample {
    std::string name; // the NN prefix of the files
    std::string description;
    std::string code;
    std::string common_errors;
};

struct PromptTemplate {
    std::string role;
    std::string knowledge;
    std::string api;
    std::vector<FewShotExample> examples;
    std::string negative;
    std::string task;
};

namespace detail {

inline std::string read_section(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::TemplateError, "missing template file " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    auto text = buffer.str();
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r' || text.back() == ' ')) {
        text.pop_back();
    }
    if (text.empty()) {
        throw Error(ErrorCode::TemplateError, "template file " + path.string() + " is empty");
    }
    return text;
}

} // namespace detail

// Layout: role.txt, knowledge.txt, api.txt, negative.txt, task.txt and
// examples/NN-{description,code,errors}.txt, examples ordered by NN.
inline PromptTemplate load_template(const std::filesystem::path& dir) {
    PromptTemplate t;
    t.role = detail::read_section(dir / "role.txt");
    t.knowledge = detail::read_section(dir / "knowledge.txt");
    t.api = detail::read_section(dir / "api.txt");
    t.negative = detail::read_section(dir / "negative.txt");
    t.task = detail::read_section(dir / "task.txt");

    const auto examples_dir = dir / "examples";
    std::map<std::string, bool> names;
    if (std::filesystem::is_directory(examples_dir)) {
        static const std::regex pattern(R"((\d+)-(description|code|errors)\.txt)");
        for (const auto& entry : std::filesystem::directory_iterator(examples_dir)) {
            std::smatch match;
            const auto file = entry.path().filename().string();
            if (std::regex_match(file, match, pattern)) {
                names[match[1]] = true;
            }
        }
    }
    for (const auto& [name, _] : names) {
        FewShotExample example;
        example.name = name;
        example.description = detail::read_section(examples_dir / (name + "-description.txt"));
        example.code = detail::read_section(examples_dir / (name + "-code.txt")) + "\n";
        example.common_errors = detail::read_section(examples_dir / (name + "-errors.txt"));
        t.examples.push_back(std::move(example));
    }
    if (t.examples.empty()) {
        throw Error(ErrorCode::TemplateError, "no few-shot examples under " + examples_dir.string());
    }
    return t;
}

// Reloads the template directory when any file in it changed. A broken edit
// keeps the last good template and is reported through last_error().
class TemplateStore {
public:
    explicit TemplateStore(std::filesystem::path dir) : dir_(std::move(dir)) {
        current_ = std::make_shared<const PromptTemplate>(load_template(dir_));
        stamp_ = fingerprint();
    }

    std::shared_ptr<const PromptTemplate> get() {
        std::lock_guard lock(mutex_);
        const auto now = fingerprint();
        if (now != stamp_) {
            stamp_ = now;
            try {
                current_ = std::make_shared<const PromptTemplate>(load_template(dir_));
                last_error_.clear();
            } catch (const Error& e) {
                last_error_ = e.what();
            }
        }
        return current_;
    }

    std::string last_error() const {
        std::lock_guard lock(mutex_);
        return last_error_;
    }

    const std::filesystem::path& directory() const { return dir_; }

private:
    std::string fingerprint() const {
        std::vector<std::string> entries;
        std::error_code ec;
        for (auto it = std::filesystem::recursive_directory_iterator(dir_, ec);
             !ec && it != std::filesystem::recursive_directory_iterator(); it.increment(ec)) {
            if (it->is_regular_file(ec)) {
                const auto time = std::filesystem::last_write_time(it->path(), ec).time_since_epoch().count();
                entries.push_back(it->path().string() + ":" + std::to_string(time) + ":" +
                                  std::to_string(it->file_size(ec)));
            }
        }
        std::sort(entries.begin(), entries.end());
        std::string out;
        for (const auto& e : entries) {
            out += e + "\n";
        }
        return out;
    }

    std::filesystem::path dir_;
    mutable std::mutex mutex_;
    std::shared_ptr<const PromptTemplate> current_;
    std::string stamp_;
    std::string last_error_;
};

} // namespace promodel::prompting
