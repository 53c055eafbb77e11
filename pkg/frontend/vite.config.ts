import { defineConfig } from "vitest/config";

const ARENA = "http://127.0.0.1:8000";

export default defineConfig({
  server: {
    proxy: {
      "/session": ARENA,
      "/battle": ARENA,
      "/leaderboard": ARENA,
      "/export": ARENA,
    },
  },
  test: {
    environment: "node",
    testTimeout: 30000,
    hookTimeout: 60000,
  },
});
