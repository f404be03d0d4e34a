// Copyright 2026 The vidrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "vidrag/prompts.hpp"

#include <utility>

#include "vidrag/error.hpp"
#include "vidrag/hash.hpp"

namespace vidrag {

namespace detail {
const std::vector<std::pair<std::string_view, std::string_view>>& embedded_prompt_sources();
}

namespace {

std::string_view trim_newlines(std::string_view s) {
    while (!s.empty() && (s.front() == '\n' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

const std::map<std::string, PromptTemplate, std::less<>>& registry() {
    static const auto templates = [] {
        std::map<std::string, PromptTemplate, std::less<>> out;
        for (const auto& [name, source] : detail::embedded_prompt_sources()) {
            auto t = parse_prompt_template(source);
            if (t.name != name) {
                throw Error(ErrorCode::kInvalidParams, "prompt file " + std::string(name) + " declares name " + t.name);
            }
            out.emplace(t.name, std::move(t));
        }
        return out;
    }();
    return templates;
}

}  // namespace

std::string PromptTemplate::render_user(const std::map<std::string, std::string>& values) const {
    std::string out;
    out.reserve(user.size());
    std::size_t pos = 0;
    while (true) {
        const auto open = user.find("{{", pos);
        if (open == std::string::npos) {
            out.append(user, pos, std::string::npos);
            break;
        }
        const auto close = user.find("}}", open + 2);
        if (close == std::string::npos) {
            throw Error(ErrorCode::kInvalidParams, "unterminated placeholder in prompt " + name);
        }
        out.append(user, pos, open - pos);
        const auto key = user.substr(open + 2, close - open - 2);
        const auto it = values.find(key);
        if (it == values.end()) {
            throw Error(ErrorCode::kInvalidParams, "prompt " + name + " needs a value for {{" + key + "}}");
        }
        out += it->second;
        pos = close + 2;
    }
    return out;
}

PromptTemplate parse_prompt_template(std::string_view text) {
    PromptTemplate t;
    std::size_t pos = 0;
    while (pos < text.size() && text[pos] == '#') {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        const auto line = text.substr(pos, nl - pos);
        pos = nl + 1;
        const auto colon = line.find(':');
        if (colon == std::string_view::npos) continue;
        auto key = line.substr(1, colon - 1);
        auto value = line.substr(colon + 1);
        while (!key.empty() && key.front() == ' ') key.remove_prefix(1);
        while (!value.empty() && value.front() == ' ') value.remove_prefix(1);
        while (!value.empty() && (value.back() == ' ' || value.back() == '\r')) value.remove_suffix(1);
        if (key == "prompt") t.name = value;
        if (key == "version") t.version = value;
    }
    const auto body = text.substr(std::min(pos, text.size()));
    const auto sys = body.find("[system]\n");
    const auto usr = body.find("[user]\n");
    if (t.name.empty() || t.version.empty() || sys == std::string_view::npos || usr == std::string_view::npos ||
        usr < sys) {
        throw Error(ErrorCode::kInvalidParams, "prompt template needs name/version headers and [system]/[user] sections");
    }
    t.system = trim_newlines(body.substr(sys + 9, usr - sys - 9));
    t.user = trim_newlines(body.substr(usr + 7));
    return t;
}

const PromptTemplate& prompt_template(std::string_view name) {
    const auto& reg = registry();
    const auto it = reg.find(name);
    if (it == reg.end()) throw Error(ErrorCode::kNotFound, "no prompt template '" + std::string(name) + "'");
    return it->second;
}

std::vector<std::string> prompt_template_names() {
    std::vector<std::string> names;
    for (const auto& [name, _] : registry()) names.push_back(name);
    return names;
}

std::string prompt_set_version() {
    std::string all;
    for (const auto& [name, t] : registry()) {
        all += name + '\0' + t.version + '\0' + t.system + '\0' + t.user + '\0';
    }
    return to_hex64(stable_hash64(all));
}

}  // namespace vidrag
