#pragma once
// Line-oriented "key value" text files used for configs, manifests and
// metric reports. Keys are single tokens; the value is the rest of the
// line, trimmed. '#' starts a comment, blank lines are skipped.

#include <string>
#include <utility>
#include <vector>

namespace reverb {

using KvEntries = std::vector<std::pair<std::string, std::string>>;

KvEntries read_kv_file(const std::string& path);
KvEntries parse_kv_text(const std::string& text, const std::string& context);
void write_kv_file(const KvEntries& entries, const std::string& path);

} // namespace reverb
