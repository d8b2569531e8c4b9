#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "promodel/error.hpp"
#include "promodel/orchestrator/conversation.hpp"

namespace promodel::service {

// Conversations by id. With a path, every saved state is appended to a JSON
// lines file; on startup the last record per id wins.
class ConversationStore {
public:
    // Turns run on a copy under `turn`; readers only wait for the brief swap.
    struct Entry {
        std::mutex turn;
        mutable std::mutex state;
        orchestrator::Conversation conversation;

        orchestrator::Conversation snapshot() const {
            std::lock_guard lock(state);
            return conversation;
        }
        void replace(orchestrator::Conversation next) {
            std::lock_guard lock(state);
            conversation = std::move(next);
        }
    };

    ConversationStore() = default;

    explicit ConversationStore(std::filesystem::path path) : path_(std::move(path)) {
        if (path_.empty() || !std::filesystem::exists(path_)) {
            return;
        }
        std::ifstream in(path_);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) {
                continue;
            }
            const auto j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded()) {
                // a torn final write; everything before it is intact
                continue;
            }
            auto conversation = orchestrator::conversation_from_json(j);
            auto entry = std::make_shared<Entry>();
            entry->conversation = std::move(conversation);
            entries_[entry->conversation.id] = entry;
        }
    }

    bool contains(const std::string& id) const {
        std::lock_guard lock(mutex_);
        return entries_.count(id) > 0;
    }

    // Adds a new conversation; ids must be unique.
    std::shared_ptr<Entry> insert(orchestrator::Conversation conversation) {
        auto entry = std::make_shared<Entry>();
        entry->conversation = std::move(conversation);
        {
            std::lock_guard lock(mutex_);
            if (!entries_.emplace(entry->conversation.id, entry).second) {
                throw Error(ErrorCode::PreconditionFailed, "conversation id " + entry->conversation.id + " is taken");
            }
        }
        save(entry->conversation);
        return entry;
    }

    std::shared_ptr<Entry> find(const std::string& id) const {
        std::lock_guard lock(mutex_);
        const auto it = entries_.find(id);
        return it == entries_.end() ? nullptr : it->second;
    }

    std::vector<std::string> ids() const {
        std::lock_guard lock(mutex_);
        std::vector<std::string> out;
        for (const auto& [id, _] : entries_) {
            out.push_back(id);
        }
        return out;
    }

    // Persists the current state of a conversation (call with its turn lock held).
    void save(const orchestrator::Conversation& conversation) {
        if (path_.empty()) {
            return;
        }
        const auto line = orchestrator::to_json(conversation).dump() + "\n";
        std::lock_guard lock(file_mutex_);
        std::ofstream out(path_, std::ios::app | std::ios::binary);
        if (!out) {
            throw Error(ErrorCode::ConfigError, "cannot write conversation store " + path_.string());
        }
        out << line;
        out.flush();
    }

private:
    std::filesystem::path path_; // empty: memory only
    mutable std::mutex mutex_;
    std::mutex file_mutex_;
    std::map<std::string, std::shared_ptr<Entry>> entries_;
};

} // namespace promodel::service
