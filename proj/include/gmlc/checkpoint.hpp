#pragma once

#include <map>
#include <string>

#include "gmlc/param.hpp"

namespace gmlc {

// Textual parameter snapshot. Values are written as hexadecimal floats, so
// save -> load restores every double bit-for-bit on any platform. Only values
// travel; gradients and momentum buffers start fresh after a load.
//
//   gmlc-checkpoint v1
//   meta <key> <value>            (sorted; keys/values without whitespace)
//   tensor <name> <rank> <extents...>
//   <hexfloat values, a few per line>
//   ...
//   end
void save_checkpoint(const std::string& path, const ParamStore& store,
                     const std::map<std::string, std::string>& meta);

// Fills an already-constructed store: every tensor in the file must match an
// existing parameter's name and shape, and every parameter must be covered.
// Returns the meta map for the caller to validate against its config.
std::map<std::string, std::string> load_checkpoint(const std::string& path, ParamStore& store);

}  // namespace gmlc
