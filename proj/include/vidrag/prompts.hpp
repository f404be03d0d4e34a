// Copyright 2026 The vidrag Authors
// SPDX-License-Identifier: Apache-2.0

// Versioned prompt templates. The sources live in prompts/*.prompt and are
// compiled into the library; placeholders are written {{name}}.

#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace vidrag {

struct PromptTemplate {
    std::string name;
    std::string version;
    std::string system;
    std::string user;

    /// Substitutes every {{key}} in the user template in one pass.
    /// Throws Error(kInvalidParams) for a placeholder without a value.
    std::string render_user(const std::map<std::string, std::string>& values) const;
};

/// Parses the `# prompt:` / `# version:` header and the [system] / [user]
/// sections. Throws Error(kInvalidParams).
PromptTemplate parse_prompt_template(std::string_view text);

/// Throws Error(kNotFound) for unknown names.
const PromptTemplate& prompt_template(std::string_view name);
std::vector<std::string> prompt_template_names();

/// Hash over every template's name, version and text; reports carry it so
/// numbers are only compared within one prompt set.
std::string prompt_set_version();

}  // namespace vidrag
