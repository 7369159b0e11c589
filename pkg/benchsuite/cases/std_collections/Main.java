public class Main {
    public static void main(String[] args) {
        ArrayList<String> names = new ArrayList<>();
        names.add("Ada");
        HashMap<String, Integer> ages = new HashMap<>();
        ages.put("Ada", 36);
        System.out.println(names + " " + ages);
    }
}
