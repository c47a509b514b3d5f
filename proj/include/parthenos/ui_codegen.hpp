#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "parthenos/kb.hpp"

namespace parthenos {

// Markup fragment for one panel: heading from the label property, one labeled
// input per visible field in ascending position order. Input type follows the
// attribute type: int/double -> number, boolean -> checkbox, else text.
std::string render_panel(const KnowledgeBase& kb, const std::string& panel_id);

std::string render_index_html(const KnowledgeBase& kb);

// Writes index.html, style.css, and app.js; byte-deterministic in the
// knowledge base. Returns the written file names.
std::vector<std::string> generate_site(const KnowledgeBase& kb,
                                       const std::filesystem::path& out_dir);

}  // namespace parthenos
