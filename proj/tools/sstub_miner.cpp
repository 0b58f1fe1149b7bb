#include "sstub/errors.hpp"
#include "sstub/pipeline.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <sstream>

int main(int argc, char** argv)
{
    CLI::App app { "Trace simple-stupid-bug records to their origin commits and report their life cycle" };
    app.name("sstub-miner");

    std::string command;
    std::string config_path;
    std::string dataset, repos_dir, output, formats;
    bool clone_missing = false;
    int jobs = 0;

    app.add_option("command", command, "run | ingest | mine | analyze | flagcheck | report")
        ->required()
        ->check(CLI::IsMember({ "run", "ingest", "mine", "analyze", "flagcheck", "report" }));
    app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
    app.add_option("--dataset", dataset, "ManySStuBs4J JSON dataset");
    app.add_option("--repos-dir", repos_dir, "Repository cache directory (<owner>__<repo> entries)");
    app.add_flag("--clone-missing", clone_missing, "Clone repositories missing from the cache");
    app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--output", output, "Output directory, or - to print the report on standard output");
    app.add_option("--format", formats, "Comma-separated report formats: json,csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : sstub::exit_code::config_error;
    }

    sstub::RunConfig config;
    try {
        if (!config_path.empty())
            config = sstub::load_config(config_path);
    } catch (const sstub::ConfigError& e) {
        std::cerr << "sstub-miner: configuration error: " << e.what() << '\n';
        return sstub::exit_code::config_error;
    }
    if (!dataset.empty())
        config.dataset_path = dataset;
    if (!repos_dir.empty())
        config.repos_dir = repos_dir;
    if (clone_missing)
        config.clone_missing = true;
    if (jobs > 0)
        config.jobs = jobs;
    if (output == "-")
        config.report_to_stdout = true;
    else if (!output.empty())
        config.output_dir = output;
    if (!formats.empty()) {
        config.report_formats.clear();
        std::istringstream list(formats);
        for (std::string item; std::getline(list, item, ',');) {
            if (!item.empty())
                config.report_formats.push_back(item);
        }
    }

    if (command == "run")
        return sstub::run_pipeline(config);
    return sstub::run_stage(*sstub::stage_from_string(command), config);
}
