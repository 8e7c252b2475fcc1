import { describe, expect, it } from "vitest";
import {
  ApiClient,
  ApiError,
  InfeasibleApiError,
  StaleRevisionError,
} from "../src/api.js";
import { FakeServer } from "./fake-server.js";

function makeClient(): { client: ApiClient; server: FakeServer } {
  const server = new FakeServer();
  return { client: new ApiClient("", server.fetch), server };
}

describe("api client", () => {
  it("creates sessions at revision 0", async () => {
    const { client } = makeClient();
    const doc = await client.createSession(["a", "b", "c"]);
    expect(doc.revision).toBe(0);
    expect(doc.n).toBe(3);
    expect(doc.results).toEqual({});
  });

  it("rejects bad criteria with the server detail", async () => {
    const { client } = makeClient();
    await expect(client.createSession(["only"])).rejects.toMatchObject({
      status: 400,
      detail: expect.stringContaining("2..8"),
    });
  });

  it("sends If-Match as a quoted revision", async () => {
    const { client, server } = makeClient();
    const doc = await client.createSession(["a", "b"]);
    await client.putConstraints(doc.id, { linguistic: [] }, doc.revision);
    expect(server.lastIfMatch).toBe('"0"');
  });

  it("maps 409 to StaleRevisionError with the live revision", async () => {
    const { client } = makeClient();
    const doc = await client.createSession(["a", "b"]);
    await client.putConstraints(doc.id, { linguistic: [] }, 0);
    try {
      await client.putConstraints(doc.id, { linguistic: [] }, 0);
      expect.unreachable("second stale write must throw");
    } catch (err) {
      expect(err).toBeInstanceOf(StaleRevisionError);
      expect((err as StaleRevisionError).revision).toBe(1);
      expect((err as StaleRevisionError).status).toBe(409);
    }
  });

  it("maps 422 to InfeasibleApiError carrying the report", async () => {
    const { client, server } = makeClient();
    const doc = await client.createSession(["a", "b"]);
    server.infeasibleReport = {
      max_violation: 0.4,
      worst_constraints: [{ constraint: "importance mu(1)/mu(2)", violation: 0.4 }],
      suggested_relaxation: ["importance mu(1)/mu(2)"],
    };
    try {
      await client.identify(doc.id, "semantic", doc.revision);
      expect.unreachable("infeasible identify must throw");
    } catch (err) {
      expect(err).toBeInstanceOf(InfeasibleApiError);
      expect((err as InfeasibleApiError).report.suggested_relaxation).toHaveLength(1);
    }
  });

  it("maps other failures to plain ApiError", async () => {
    const { client } = makeClient();
    await expect(client.getSession("nope")).rejects.toBeInstanceOf(ApiError);
    const doc = await client.createSession(["a", "b"]);
    await expect(client.rank(doc.id)).rejects.toMatchObject({
      status: 400,
      detail: expect.stringContaining("concepts"),
    });
  });

  it("requires densities for sugeno, then remembers them", async () => {
    const { client } = makeClient();
    const doc = await client.createSession(["a", "b"]);
    await expect(client.identify(doc.id, "sugeno", 0)).rejects.toMatchObject({ status: 400 });
    const densities = { n: 2, densities: [0.4, 0.4] };
    const result = await client.identify(doc.id, "sugeno", 0, { densities });
    expect(result.method).toBe("sugeno");
    expect(result.revision).toBe(1); // density upload counts as a mutation
    const again = await client.identify(doc.id, "sugeno", 1);
    expect(again.revision).toBe(1); // same densities, no bump
  });

  it("fetches indices and capacity text for the viewed method", async () => {
    const { client } = makeClient();
    const doc = await client.createSession(["a", "b", "c"]);
    await client.identify(doc.id, "semantic", 0);
    const indices = await client.indices(doc.id, "semantic");
    expect(indices.indices.shapley).toHaveLength(3);
    expect(indices.computed_at).toBe(0);
    const text = await client.capacityText(doc.id, "semantic");
    const parsed = JSON.parse(text);
    expect(parsed.n).toBe(3);
    expect(Object.keys(parsed.coefficients)).toHaveLength(7);
    expect(text.endsWith("\n")).toBe(true);
  });

  it("reports missing results as 404", async () => {
    const { client } = makeClient();
    const doc = await client.createSession(["a", "b"]);
    await expect(client.indices(doc.id)).rejects.toMatchObject({ status: 404 });
  });
});
