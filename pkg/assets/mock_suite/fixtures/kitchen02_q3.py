def answer_question(video, possible_answers):
    vid_seg = video.trim(0, len(video) // 2)
    image_context = vid_seg.get_caption(vid_seg.num_frames // 2)
    activity_context = vid_seg.video_query("What is the person doing?")
    context = {"caption": image_context, "activity": activity_context}
    answer = vid_seg.choose_option("what is being prepared?", context, possible_answers)
    return answer
