import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    globalSetup: ["tests/globalSetup.ts"],
    testTimeout: 180000,
    hookTimeout: 300000,
  },
});
