// Export and import store tables as JSON lines.
//
//   store-tool export --db store.log --table posts --out posts.jsonl
//   store-tool export --db store.log --all --dir exports/
//   store-tool import --db store.log --table users --in users.jsonl
//   store-tool count --db store.log
//   store-tool compact --db store.log

#include <glog/logging.h>

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "paperfeed/common/errors.hpp"
#include "paperfeed/store/store.hpp"

using namespace paperfeed;
namespace fs = std::filesystem;

int main(int argc, char** argv) {
  google::InitGoogleLogging(argv[0]);
  FLAGS_logtostderr = true;

  CLI::App app{"Store export/import"};
  app.require_subcommand(1);
  std::string db;
  app.add_option("--db", db, "store log file")->required();

  std::string table_name;
  std::string file;
  std::string dir;
  bool all = false;
  auto* exp = app.add_subcommand("export", "write a table (or all tables) as JSON lines");
  exp->add_option("--table", table_name, "posts|interactions|users|recs|counterfactuals|access_logs");
  exp->add_option("--out", file, "output file (default stdout)");
  exp->add_flag("--all", all, "export every table into --dir");
  exp->add_option("--dir", dir, "output directory for --all");

  auto* imp = app.add_subcommand("import", "load JSON lines into a table");
  imp->add_option("--table", table_name)->required();
  imp->add_option("--in", file, "input file")->required()->check(CLI::ExistingFile);

  auto* count = app.add_subcommand("count", "row counts per table");
  auto* compact = app.add_subcommand("compact", "rewrite the log as a single snapshot");
  (void)count;

  CLI11_PARSE(app, argc, argv);

  try {
    if (compact->parsed()) {
      store::FileKv kv(db);
      kv.compact();
      return 0;
    }
    const auto store = store::open_file_store(db);
    if (exp->parsed()) {
      if (all) {
        if (dir.empty()) throw Error("--all needs --dir");
        fs::create_directories(dir);
        for (const auto table : store::kAllTables) {
          std::ofstream out(fs::path(dir) / (std::string(store::to_string(table)) + ".jsonl"), std::ios::trunc);
          store->export_table(table, out);
        }
      } else {
        if (table_name.empty()) throw Error("--table or --all is required");
        const auto table = store::parse_table(table_name);
        if (file.empty()) {
          store->export_table(table, std::cout);
        } else {
          std::ofstream out(file, std::ios::trunc);
          if (!out) throw Error("cannot write " + file);
          store->export_table(table, out);
        }
      }
    } else if (imp->parsed()) {
      std::ifstream in(file);
      store->import_table(store::parse_table(table_name), in);
    } else {
      for (const auto table : store::kAllTables) std::cout << store::to_string(table) << ' ' << store->count(table) << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "store-tool: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
