/** Entry point: create a session from the default plan and start reading. */

import { StudyClient, StudyPlan } from "./api.js";
import { Viewer } from "./viewer.js";

const DEFAULT_PLAN: StudyPlan = {
  conditions: [
    [0, "healthy"],
    [0, "lesion"],
    [2, "healthy"],
    [2, "lesion"],
    [4, "healthy"],
    [4, "lesion"],
  ],
  stacks_per_condition: 5,
  seed: Math.floor(Math.random() * 2 ** 31),
  frame_rate: 10,
};

async function main(): Promise<void> {
  const canvas = document.getElementById("viewer") as HTMLCanvasElement;
  const status = document.getElementById("status") as HTMLElement;
  const client = new StudyClient("");
  status.textContent = "creating session...";
  const session = await client.createSession(DEFAULT_PLAN);
  const viewer = new Viewer(
    client,
    session.session_id,
    session.n_trials,
    session.n_frames,
    session.frame_rate,
    canvas,
    status,
  );
  await viewer.start();
}

main().catch((err) => {
  const status = document.getElementById("status");
  if (status) status.textContent = String(err);
});
