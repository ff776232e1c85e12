#include "kdvlab/config.hpp"

#include <fstream>
#include <sstream>

#include "kdvlab/errors.hpp"

namespace kdvlab {

namespace {

std::string strip(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

} // namespace

ConfigFile ConfigFile::parse_text(const std::string& text) {
    ConfigFile cfg;
    KeyValues* current = &cfg.global;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = strip(line);
        if (s.empty() || s[0] == '#') continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw ConfigInvalid("line " + std::to_string(lineno) + ": unterminated section");
            const std::string name = strip(s.substr(1, s.size() - 2));
            if (name.empty())
                throw ConfigInvalid("line " + std::to_string(lineno) + ": empty section name");
            current = &cfg.sections[name];
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigInvalid("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = strip(s.substr(0, eq));
        const std::string value = strip(s.substr(eq + 1));
        if (key.empty())
            throw ConfigInvalid("line " + std::to_string(lineno) + ": empty key");
        (*current)[key] = value;
    }
    return cfg;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigInvalid("cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str());
}

} // namespace kdvlab
