#pragma once

#include "gmlc/run_config.hpp"

namespace gmlc {

void cmd_synth(const RunConfig& run);
void cmd_train(const RunConfig& run);
void cmd_eval(const RunConfig& run);
void cmd_predict(const RunConfig& run);
void cmd_gradcheck(const RunConfig& run);

}  // namespace gmlc
