#pragma once

#include <string>
#include <utility>
#include <vector>

#include "xbar/config.hpp"
#include "xbar/device.hpp"
#include "xbar/network.hpp"
#include "xbar/trainer.hpp"

namespace xbar {

// Conductance and decoded-weight maps for each named layer partition:
// gmap_<name>.txt and wmap_<name>.txt under out_dir.
void export_maps(const Crossbar& xbar,
                 const std::vector<std::pair<std::string, LayerMapping>>& layers,
                 const WeightCodec& codec, const std::string& out_dir);

// Full-array snapshot with the task name, reloadable by the export command.
struct CrossbarState {
    std::string task;
    ValueMap map;
};

void save_state(const std::string& path, const std::string& task, const Crossbar& xbar);
CrossbarState load_state(const std::string& path);

struct RunOptions {
    bool parallel = true;
    bool export_dataset = false;  // gait: also write the generated sequences
};

// Executes the configured experiment and writes all artifacts under out_dir.
// Artifact files are byte-reproducible functions of (config, seed).
void run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                    const RunOptions& options = {});

}  // namespace xbar
