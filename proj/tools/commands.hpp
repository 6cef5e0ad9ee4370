#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "settings.hpp"

namespace pls::cli {

using Json = nlohmann::ordered_json;

struct Command {
    std::string name;
    std::string description;
    std::vector<KeySpec> keys;
    std::vector<std::string> positional;  // keys that may also be given positionally
    bool writes_manifest = true;
    /// Runs the command. File-writing commands put their outputs under the
    /// `out` directory and return the manifest sections (outputs, metrics,
    /// diagnostics); the others print to `out` and return null.
    std::function<Json(const Settings&, std::ostream& out, std::ostream& err)> body;
};

const std::vector<Command>& commands();
const Command* find_command(const std::string& name);

}  // namespace pls::cli
