#include "eqr/agents/prompt.hpp"

#include "eqr/common/build_info.hpp"
#include "eqr/common/error.hpp"
#include "eqr/common/files.hpp"
#include "eqr/common/hashing.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <mutex>

namespace eqr::agents {

std::string PromptEnvelope::render_user() const {
    std::string out = user_text;
    for (const auto& [label, text] : context_blocks) {
        out += "\n\n<<<context " + label + ">>>\n" + text;
        if (!text.empty() && text.back() != '\n') out += '\n';
        out += "<<<end " + label + ">>>";
    }
    return out;
}

std::string PromptEnvelope::render() const {
    return fmt::format("<<<task {}>>>\n<<<max_tokens {}>>>\n<<<temperature {:.3f}>>>\n<<<system>>>\n{}\n<<<user>>>\n{}\n",
                       task, max_tokens, temperature, system_text, render_user());
}

std::string PromptEnvelope::hash() const { return sha256_hex(render()); }

const std::string* PromptEnvelope::context(const std::string& label) const {
    for (const auto& [l, text] : context_blocks)
        if (l == label) return &text;
    return nullptr;
}

std::string fill_template(const std::string& text, const std::map<std::string, std::string>& values) {
    std::string out;
    std::size_t pos = 0;
    while (true) {
        const auto open = text.find("{{", pos);
        if (open == std::string::npos) break;
        const auto close = text.find("}}", open + 2);
        if (close == std::string::npos) break;
        out.append(text, pos, open - pos);
        const std::string name = text.substr(open + 2, close - open - 2);
        const auto it = values.find(name);
        if (it == values.end()) throw Error(ErrorCode::ConfigError, "template placeholder has no value", {{"placeholder", name}});
        out += it->second;
        pos = close + 2;
    }
    out.append(text, pos, std::string::npos);
    return out;
}

PromptLibrary PromptLibrary::load(const std::filesystem::path& directory) {
    std::error_code ec;
    if (!std::filesystem::is_directory(directory, ec)) {
        throw Error(ErrorCode::ConfigError, "prompt directory not found", {{"path", directory.string()}});
    }
    PromptLibrary lib;
    for (const auto& entry : std::filesystem::directory_iterator(directory)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
        std::string text = read_file(entry.path());
        while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
        lib.add(entry.path().stem().string(), std::move(text));
    }
    return lib;
}

const PromptLibrary& PromptLibrary::shipped() {
    static const PromptLibrary lib = load(default_data_dir() / "prompts");
    return lib;
}

const std::string& PromptLibrary::get(const std::string& name) const {
    const auto it = templates_.find(name);
    if (it == templates_.end()) throw Error(ErrorCode::ConfigError, "unknown prompt template", {{"template", name}});
    return it->second;
}

std::string PromptLibrary::render(const std::string& name, const std::map<std::string, std::string>& values) const {
    try {
        return fill_template(get(name), values);
    } catch (const Error& e) {
        auto details = e.details();
        details["template"] = name;
        throw Error(e.code(), "cannot render prompt template", details);
    }
}

std::string PromptLibrary::fingerprint() const {
    HashBuilder h;
    for (const auto& [name, text] : templates_) h.add(name).add(text);
    return h.hex();
}

}  // namespace eqr::agents
