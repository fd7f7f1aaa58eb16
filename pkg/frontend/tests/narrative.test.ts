import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/client.js";
import { NarrativePanel } from "../src/narrative.js";
import { IDS, makeFixture } from "./fixture.js";

function makePanel() {
  const fixture = makeFixture();
  const el = document.createElement("section");
  document.body.appendChild(el);
  const errors: string[] = [];
  const panel = new NarrativePanel(
    el,
    new ApiClient("http://fixture.test", fixture.fetchImpl),
    { onError: (m) => errors.push(m), now: () => 1_700_000_000_000, makeId: () => "fb-1" },
  );
  return { panel, el, errors, ...fixture };
}

beforeEach(() => {
  document.body.innerHTML = "";
});

describe("narrative panel", () => {
  it("shows text and the full critic trail", async () => {
    const { panel, el, state } = makePanel();
    await panel.show(IDS.TX1);
    expect(el.querySelector(".narrative-text")!.textContent).toBe(
      state.narratives.get(IDS.TX1)!.text,
    );
    expect(el.querySelectorAll(".critic-round").length).toBe(3);
    expect(el.querySelector(".critic-trail summary")!.textContent).toBe(
      "critic trail (3 rounds)",
    );
  });

  it("accept stores feedback and leaves the text unchanged", async () => {
    const { panel, el, state } = makePanel();
    await panel.show(IDS.TX1);
    const before = el.querySelector(".narrative-text")!.textContent;
    await panel.accept();
    expect(state.feedback).toHaveLength(1);
    expect(state.feedback[0]).toMatchObject({
      tx_id: IDS.TX1,
      narrative_ok: true,
    });
    expect(el.querySelector(".narrative-text")!.textContent).toBe(before);
  });

  it("a correction round-trips: panel refreshes from the service", async () => {
    const { panel, el, state } = makePanel();
    await panel.show(IDS.TX1);
    const corrected = "- Fixed line one.\n- Fixed line two.\n- Fixed line three.";
    await panel.correct(corrected);

    expect(state.feedback[0]).toMatchObject({
      tx_id: IDS.TX1,
      narrative_ok: false,
      corrected_text: corrected,
    });
    // The fixture mutated its stored narrative; the panel must show the
    // re-fetched text, including the version note the service now reports.
    expect(state.narratives.get(IDS.TX1)!.text).toBe(corrected);
    expect(el.querySelector(".narrative-text")!.textContent).toBe(corrected);
    expect(el.querySelector(".version-note")!.textContent).toBe(
      "1 earlier version(s)",
    );
  });

  it("rolls back the optimistic text when the POST fails", async () => {
    const { panel, el, errors, state } = makePanel();
    await panel.show(IDS.TX1);
    const original = el.querySelector(".narrative-text")!.textContent;
    state.failNextFeedback = true;
    await panel.correct("- Bad correction.");
    expect(el.querySelector(".narrative-text")!.textContent).toBe(original);
    expect(errors.some((m) => m.includes("503"))).toBe(true);
    expect(state.feedback).toHaveLength(0);
  });

  it("surfaces unknown tx ids instead of rendering", async () => {
    const { panel, el, errors } = makePanel();
    await panel.show(IDS.TX3);
    expect(panel.narrative).toBeNull();
    expect(el.textContent).toBe("");
    expect(errors[0]).toContain(IDS.TX3);
  });

  it("shows the unverified flag when the service sets it", async () => {
    const { panel, el, state } = makePanel();
    state.narratives.get(IDS.TX1)!.flags = ["unverified"];
    await panel.show(IDS.TX1);
    expect(el.querySelector(".flag.unverified")).not.toBeNull();
  });

  it("serializes concurrent feedback posts", async () => {
    const { panel, state } = makePanel();
    await panel.show(IDS.TX1);
    const p1 = panel.accept();
    const p2 = panel.accept();
    await Promise.all([p1, p2]);
    await panel.whenIdle();
    expect(state.feedback).toHaveLength(2);
  });
});
