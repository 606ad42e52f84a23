#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "commands.hpp"
#include "gmlc/error.hpp"
#include "gmlc/run_config.hpp"

int main(int argc, char** argv) {
    CLI::App app{"graph-matching multi-label image classifier"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out;
    std::vector<std::string> overrides;
    uint64_t seed_value = 0;
    app.add_option("--config", config_path, "key=value config file");
    CLI::Option* seed_option = app.add_option("--seed", seed_value, "master seed for all randomness");
    app.add_option("--out", out, "output directory");
    app.add_option("--set", overrides, "override one config key (key=value), repeatable")->type_size(1);

    for (auto [name, help] : {std::pair{"synth", "generate a synthetic dataset with label embeddings"},
                              {"train", "train a model, writing checkpoint and history"},
                              {"eval", "score a dataset against a checkpoint and report metrics"},
                              {"predict", "score one record and name each class's winning instance"},
                              {"gradcheck", "finite-difference check of the full pipeline gradient"}})
        app.add_subcommand(name, help)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;  // bad flags are config errors; --help is not
    }

    try {
        std::optional<uint64_t> seed;
        if (seed_option->count()) seed = seed_value;
        gmlc::RunConfig run = gmlc::resolve_run_config(config_path, overrides, seed, out);
        const std::string& command = app.get_subcommands().front()->get_name();
        if (command == "synth")
            gmlc::cmd_synth(run);
        else if (command == "train")
            gmlc::cmd_train(run);
        else if (command == "eval")
            gmlc::cmd_eval(run);
        else if (command == "predict")
            gmlc::cmd_predict(run);
        else
            gmlc::cmd_gradcheck(run);
        return 0;
    } catch (const gmlc::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const gmlc::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const gmlc::ShapeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const gmlc::NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
