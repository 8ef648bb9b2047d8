#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace eqr::agents {

/// Everything a provider sees for one completion. `task` names the calling
/// operation ("concept", "thesis.rationale", "judge", ...) so deterministic
/// providers can dispatch on it.
struct PromptEnvelope {
    std::string task;
    std::string system_text;
    std::string user_text;
    std::vector<std::pair<std::string, std::string>> context_blocks;  // (label, text), in order
    int max_tokens = 1024;
    double temperature = 0.0;

    /// Stable textual form; every field participates.
    std::string render() const;
    /// User text followed by the context blocks, as sent to chat providers.
    std::string render_user() const;
    /// sha256 of render().
    std::string hash() const;
    const std::string* context(const std::string& label) const;

    bool operator==(const PromptEnvelope&) const = default;
};

/// Named prompt templates with `{{placeholder}}` slots, one file per template.
class PromptLibrary {
public:
    /// Loads every `*.txt` in the directory; the template name is the file stem.
    static PromptLibrary load(const std::filesystem::path& directory);
    /// The shipped templates under the default data directory.
    static const PromptLibrary& shipped();

    void add(std::string name, std::string text) { templates_[std::move(name)] = std::move(text); }
    /// Throws ConfigError for unknown names.
    const std::string& get(const std::string& name) const;
    /// Fills every placeholder; an unfilled placeholder is a ConfigError.
    std::string render(const std::string& name, const std::map<std::string, std::string>& values) const;
    /// Hash over all template names and bodies; changes whenever a template does.
    std::string fingerprint() const;

private:
    std::map<std::string, std::string> templates_;
};

std::string fill_template(const std::string& text, const std::map<std::string, std::string>& values);

}  // namespace eqr::agents
