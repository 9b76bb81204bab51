#pragma once
// Prompt templates for the commander and the check agents. Slots use
// {{name}} markers; rendering binds every slot or fails loudly. The same
// texts ship under data/prompts/ for deployments that want to edit them.

#include <cctype>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

namespace secretsift {

struct PromptTemplates {
    std::string p_gen;    // commander decision template
    std::string p_agent;  // check-agent instruction template
};

// Documented slots:
//   p_gen:   {{key}} {{file_path}} {{file_kind}} {{entropy_bits}} {{tool_results}}
//   p_agent: {{agent}} {{key}} {{context}} {{tool_results}}
inline const PromptTemplates& default_prompt_templates() {
    static const PromptTemplates templates{
        // p_gen
        "You are the commander of a secret-leak verification pipeline.\n"
        "Candidate value: {{key}}\n"
        "Found in: {{file_path}} (kind: {{file_kind}}, entropy: {{entropy_bits}} bits/char)\n"
        "Evidence gathered so far:\n"
        "{{tool_results}}\n"
        "Decide the next step. Reply with one fenced JSON object, either\n"
        "{\"action\":\"dispatch\",\"agent\":\"basic|advanced\"} or\n"
        "{\"action\":\"final\",\"classification\":\"true_leak|false_positive|undetermined\","
        "\"confidence\":\"high|low\",\"reasons\":[\"...\"]}.\n",
        // p_agent
        "You are the {{agent}} check agent of a secret-leak verification pipeline.\n"
        "Candidate value: {{key}}\n"
        "Surrounding context:\n{{context}}\n"
        "Tool results:\n{{tool_results}}\n"
        "Weigh the tool results as evidence, not as verdicts, and reply with one fenced JSON "
        "object as instructed for your stage.\n"};
    return templates;
}

/// Replaces every {{slot}} with its binding. Throws if a slot marker remains
/// unreplaced afterwards, so missing bindings never reach a backend.
inline std::string render_template(std::string_view tpl,
                                   const std::map<std::string, std::string>& slots) {
    std::string out(tpl);
    for (const auto& [name, value] : slots) {
        const std::string marker = "{{" + name + "}}";
        std::size_t pos = 0;
        while ((pos = out.find(marker, pos)) != std::string::npos) {
            out.replace(pos, marker.size(), value);
            pos += value.size();
        }
    }
    // Slot values may legitimately contain braces (JSON evidence); only
    // {{identifier}} markers count as unreplaced.
    std::size_t pos = 0;
    while ((pos = out.find("{{", pos)) != std::string::npos) {
        const std::size_t close = out.find("}}", pos + 2);
        if (close == std::string::npos) break;
        const std::string_view inner = std::string_view(out).substr(pos + 2, close - pos - 2);
        bool identifier = !inner.empty();
        for (char c : inner) {
            if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) {
                identifier = false;
                break;
            }
        }
        if (identifier) {
            throw std::invalid_argument("unbound template slot: {{" + std::string(inner) + "}}");
        }
        pos += 2;
    }
    return out;
}

}  // namespace secretsift
