import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    include: ["tests/**/*.test.ts"],
    // the integration test spawns the Python engine and waits for real HTTP
    testTimeout: 30_000,
    hookTimeout: 30_000,
  },
});
