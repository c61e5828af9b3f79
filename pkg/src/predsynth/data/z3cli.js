#!/usr/bin/env node
// Command-line front end for the z3 WebAssembly build (npm "z3-solver").
//
// Per-call mode mimics the native binary:
//   node z3cli.js [--module DIR] [-t:MS] [-rlimit:N] FILE.smt2
// prints sat/unsat/unknown on stdout.
//
// Server mode keeps one process alive for many queries:
//   node z3cli.js [--module DIR] --server
// protocol: one request per line, "SOLVE <timeout_ms> <rlimit> <path>",
// answered with "DONE <verdict> <elapsed_ms>".  The process recycles
// itself after MAX_SOLVES requests (the caller respawns on EOF).

"use strict";

const fs = require("fs");
const path = require("path");
const readline = require("readline");

const MAX_SOLVES = 400;

function findModule(explicit) {
  const candidates = [];
  if (explicit) candidates.push(explicit);
  if (process.env.Z3_WASM_DIR) candidates.push(process.env.Z3_WASM_DIR);
  candidates.push(
    path.join(process.cwd(), "node_modules", "z3-solver"),
    path.join(process.cwd(), "solver", "node_modules", "z3-solver"),
    path.join(__dirname, "..", "..", "..", "solver", "node_modules", "z3-solver"),
    path.join(process.env.HOME || "/root", "z3wasm", "node_modules", "z3-solver")
  );
  for (const cand of candidates) {
    try {
      if (fs.existsSync(path.join(cand, "package.json"))) return cand;
    } catch (_) { /* keep looking */ }
  }
  try {
    return path.dirname(require.resolve("z3-solver/package.json"));
  } catch (_) {
    return null;
  }
}

function parseArgs(argv) {
  const opts = { timeoutMs: 0, rlimit: 0, server: false, files: [], module: null };
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    if (a === "--server") opts.server = true;
    else if (a === "--module") opts.module = argv[++i];
    else if (a.startsWith("-t:")) opts.timeoutMs = parseInt(a.slice(3), 10);
    else if (a.startsWith("-rlimit:")) opts.rlimit = parseInt(a.slice(8), 10);
    else if (a === "-smt2") { /* accepted for z3 compatibility */ }
    else opts.files.push(a);
  }
  return opts;
}

function verdictOf(output) {
  for (const line of output.split("\n")) {
    const t = line.trim();
    if (t === "sat" || t === "unsat" || t === "unknown") return t;
  }
  return "error";
}

async function main() {
  const opts = parseArgs(process.argv.slice(2));
  const moduleDir = findModule(opts.module);
  if (!moduleDir) {
    console.error("z3cli: cannot locate the z3-solver npm package; " +
      "run `npm install` in the repo's solver/ directory or set Z3_WASM_DIR");
    process.exit(2);
  }
  const { init } = require(moduleDir);
  const { Z3 } = await init();

  async function solve(file, timeoutMs, rlimit) {
    Z3.global_param_reset_all();
    if (timeoutMs > 0) Z3.global_param_set("timeout", String(timeoutMs));
    if (rlimit > 0) Z3.global_param_set("rlimit", String(rlimit));
    Z3.global_param_set("smt.random_seed", "0");
    Z3.global_param_set("sat.random_seed", "0");
    const text = fs.readFileSync(file, "utf8");
    const cfg = Z3.mk_config();
    const ctx = Z3.mk_context(cfg);
    let out;
    try {
      out = await Z3.eval_smtlib2_string(ctx, text);
    } catch (err) {
      out = `(error "${String(err).replace(/"/g, "'")}")`;
    } finally {
      Z3.del_context(ctx);
    }
    return out;
  }

  if (!opts.server) {
    if (opts.files.length !== 1) {
      console.error("usage: z3cli.js [-t:MS] [-rlimit:N] FILE.smt2");
      process.exit(2);
    }
    const out = await solve(opts.files[0], opts.timeoutMs, opts.rlimit);
    process.stdout.write(out.endsWith("\n") ? out : out + "\n");
    process.exit(0);
  }

  let solved = 0;
  const rl = readline.createInterface({ input: process.stdin, terminal: false });
  console.log("READY");
  for await (const line of rl) {
    const m = line.match(/^SOLVE\s+(\d+)\s+(\d+)\s+(.*)$/);
    if (!m) {
      console.log("DONE error 0");
      continue;
    }
    const t0 = Date.now();
    const out = await solve(m[3], parseInt(m[1], 10), parseInt(m[2], 10));
    console.log(`DONE ${verdictOf(out)} ${Date.now() - t0}`);
    if (++solved >= MAX_SOLVES) break;  // recycle; caller respawns
  }
  process.exit(0);
}

main().catch((err) => {
  console.error("z3cli:", err);
  process.exit(1);
});
