#pragma once

// Flat key = value configuration files with one optional section per
// experiment:
//
//   # global keys apply to every experiment
//   seed = 42
//   outdir = out
//   [E7]
//   m = 1000
//   dt = 4e-6
//
// Precedence is resolved by the caller: defaults < global keys < section
// keys < command-line overrides.

#include <map>
#include <string>

namespace kdvlab {

using KeyValues = std::map<std::string, std::string>;

struct ConfigFile {
    KeyValues global;
    std::map<std::string, KeyValues> sections;

    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse_text(const std::string& text);
};

} // namespace kdvlab
