import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["test/**/*.test.ts"],
    testTimeout: 120_000,
    hookTimeout: 1200_000,
    // the model tests are memory-hungry; one worker keeps wasm happy
    pool: "forks",
    poolOptions: { forks: { singleFork: true } },
  },
});
