#include "reverb/kv.hpp"

#include <fstream>
#include <sstream>

#include "reverb/raster.hpp"

namespace reverb {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

} // namespace

KvEntries parse_kv_text(const std::string& text, const std::string& context) {
    KvEntries entries;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto space = line.find_first_of(" \t");
        if (space == std::string::npos) {
            throw FormatError(context + ": line " + std::to_string(lineno) +
                              " has a key with no value: '" + line + "'");
        }
        entries.emplace_back(line.substr(0, space), trim(line.substr(space + 1)));
    }
    return entries;
}

KvEntries read_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_kv_text(buf.str(), path);
}

void write_kv_file(const KvEntries& entries, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write " + path);
    for (const auto& [key, value] : entries) out << key << ' ' << value << '\n';
    if (!out) throw FormatError("write failed for " + path);
}

} // namespace reverb
