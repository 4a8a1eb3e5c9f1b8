#pragma once

#include <string>
#include <string_view>

namespace fallacyscope {

/// Readable main content of an HTML page: text of paragraph-level elements
/// inside <article>/<main> when present (else <body>), with scripts, styles
/// and navigation chrome removed. Paragraphs are separated by blank lines.
std::string extract_main_text(std::string_view html);

/// Decodes the common named entities and numeric character references.
std::string decode_entities(std::string_view s);

}  // namespace fallacyscope
